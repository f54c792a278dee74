#pragma once

#include <string>

#include "mpcci/domain.hpp"
#include "mpcci/model.hpp"
#include "mpcci/solver.hpp"

namespace mpcci {

// Everything a policy-following simulation needs: the grid geometry, the
// control table and the per-step optimal indices.
struct PolicyFile {
  GridSpec grid;
  DiscreteControlSet controls;
  ControlPolicy policy;
};

// Binary layout (host byte order):
//   char[8]  magic "MPCCIPOL"
//   uint32   format version (1)
//   int32    M, N, J, Qx, Qy
//   uint32   control count Q
//   double   half_width, dx, dy, dtau, x_hat0, y_hat0
//   Q x double[3]  control table (sigma_x, sigma_y, rho)
//   M x (N-1) x (J-1) uint16  control indices, step-major, then row-major
void write_policy(const std::string& path, const GridSpec& grid,
                  const DiscreteControlSet& controls, const ControlPolicy& policy);

// Reads and validates a file written by write_policy (Io error on mismatch).
PolicyFile read_policy(const std::string& path);

}  // namespace mpcci
