// environment_io.cpp
#include <bit>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>

#include "rem/environment.hpp"
#include "rem/error.hpp"

namespace rem {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'M', 'E', 'N', 'V', '1', '\0'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("environment file truncated");
  return to_little(v);
}

}  // namespace

void write_environment(std::ostream& os, const Environment& env) {
  const RemParams& p = env.params;
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(env.n()));
  put<double>(os, p.beta);
  put<double>(os, p.alpha);
  put<double>(os, env.scales.gamma_prime);
  put<std::uint64_t>(os, p.env_seed);
  put<double>(os, p.constants.kappa);
  put<double>(os, p.constants.C0);
  put<double>(os, p.constants.delta);
  put<double>(os, p.constants.delta_shallow);
  put<std::int32_t>(os, p.constants.K_ball);
  for (Eigen::Index x = 0; x < env.energy.size(); ++x) put<double>(os, env.energy[x]);
  if (!os) throw ConfigError("environment write failed");
}

Environment read_environment(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ConfigError("not a REMENV1 environment file");
  RemParams p;
  p.n = static_cast<int>(get<std::uint32_t>(is));
  p.beta = get<double>(is);
  p.alpha = get<double>(is);
  p.gamma_prime = get<double>(is);
  p.env_seed = get<std::uint64_t>(is);
  p.constants.kappa = get<double>(is);
  p.constants.C0 = get<double>(is);
  p.constants.delta = get<double>(is);
  p.constants.delta_shallow = get<double>(is);
  p.constants.K_ball = get<std::int32_t>(is);
  p.max_n = std::max(p.max_n, p.n);
  const Scales s = validate_params(p);
  Eigen::VectorXd energy(static_cast<Eigen::Index>(vertex_count(p.n)));
  for (Eigen::Index x = 0; x < energy.size(); ++x) energy[x] = get<double>(is);
  return assemble_environment(p, s, std::move(energy));
}

void write_environment_csv(std::ostream& os, const Environment& env) {
  os << "x,E,log_tau,is_deep\n";
  os << std::setprecision(17);
  for (std::size_t x = 0; x < env.size(); ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    os << Vertex(static_cast<std::uint32_t>(x)) << ',' << env.energy[i] << ',' << env.log_tau[i] << ','
       << int(env.is_deep[x]) << '\n';
  }
}

}  // namespace rem
