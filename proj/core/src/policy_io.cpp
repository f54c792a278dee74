#include "mpcci/policy_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'P', 'C', 'C', 'I', 'P', 'O', 'L'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(in), ErrorCategory::Io, "truncated policy file '" + path + "'");
  return v;
}

}  // namespace

void write_policy(const std::string& path, const GridSpec& grid,
                  const DiscreteControlSet& controls, const ControlPolicy& policy) {
  require(policy.M == grid.M && policy.N == grid.N && policy.J == grid.J &&
              policy.index.size() == static_cast<std::size_t>(policy.M) * policy.slice_size(),
          ErrorCategory::Internal, "policy does not match the grid");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::Io, "cannot open '" + path + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  for (int v : {grid.M, grid.N, grid.J, controls.Qx, controls.Qy}) put(out, static_cast<std::int32_t>(v));
  put(out, static_cast<std::uint32_t>(controls.size()));
  for (double v : {grid.half_width, grid.dx, grid.dy, grid.dtau, grid.x_hat0, grid.y_hat0}) put(out, v);
  for (const ControlPoint& c : controls.points) {
    put(out, c.sigma_x);
    put(out, c.sigma_y);
    put(out, c.rho);
  }
  out.write(reinterpret_cast<const char*>(policy.index.data()),
            static_cast<std::streamsize>(policy.index.size() * sizeof(std::uint16_t)));
  require(static_cast<bool>(out), ErrorCategory::Io, "failed writing '" + path + "'");
}

PolicyFile read_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::Io, "cannot open '" + path + "'");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  require(static_cast<bool>(in) && magic == kMagic, ErrorCategory::Io,
          "'" + path + "' is not a policy file");
  require(get<std::uint32_t>(in, path) == kVersion, ErrorCategory::Io,
          "unsupported policy file version in '" + path + "'");

  PolicyFile f;
  f.grid.M = get<std::int32_t>(in, path);
  f.grid.N = get<std::int32_t>(in, path);
  f.grid.J = get<std::int32_t>(in, path);
  f.controls.Qx = get<std::int32_t>(in, path);
  f.controls.Qy = get<std::int32_t>(in, path);
  const std::uint32_t q = get<std::uint32_t>(in, path);
  require(f.grid.M >= 1 && f.grid.N >= 4 && f.grid.J >= 4 && f.grid.N % 2 == 0 &&
              f.grid.J % 2 == 0 && q >= 1 && q <= 65535,
          ErrorCategory::Io, "corrupt policy header in '" + path + "'");
  f.grid.half_width = get<double>(in, path);
  f.grid.dx = get<double>(in, path);
  f.grid.dy = get<double>(in, path);
  f.grid.dtau = get<double>(in, path);
  f.grid.x_hat0 = get<double>(in, path);
  f.grid.y_hat0 = get<double>(in, path);
  f.controls.points.resize(q);
  for (ControlPoint& c : f.controls.points) {
    c.sigma_x = get<double>(in, path);
    c.sigma_y = get<double>(in, path);
    c.rho = get<double>(in, path);
  }
  f.policy.M = f.grid.M;
  f.policy.N = f.grid.N;
  f.policy.J = f.grid.J;
  f.policy.index.resize(static_cast<std::size_t>(f.policy.M) * f.policy.slice_size());
  in.read(reinterpret_cast<char*>(f.policy.index.data()),
          static_cast<std::streamsize>(f.policy.index.size() * sizeof(std::uint16_t)));
  require(static_cast<bool>(in), ErrorCategory::Io, "truncated policy data in '" + path + "'");
  for (std::uint16_t i : f.policy.index)
    require(i < q, ErrorCategory::Io, "control index out of range in '" + path + "'");
  return f;
}

}  // namespace mpcci
