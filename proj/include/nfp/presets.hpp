#pragma once

#include <string>
#include <vector>

#include "nfp/driver.hpp"

namespace nfp {

// Built-in benchmark problems. 2D symmetric problems model the half domain
// with roller supports on the symmetry plane; the 3D inverter models one
// quarter.
std::vector<std::string> preset_names();

// Full ProblemSpec for a named preset, on its default mesh unless counts are
// given (pass 0 to keep the default along an axis).
ProblemSpec make_preset(const std::string& name, int nx = 0, int ny = 0,
                        int nz = 0);

// Load case for a preset on an arbitrary compatible mesh.
LoadCase preset_loads(const std::string& name, const GridMesh& mesh,
                      double spring_stiffness);

}  // namespace nfp
