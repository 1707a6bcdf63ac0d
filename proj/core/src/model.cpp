#include "cising/model.hpp"

#include <cmath>
#include <sstream>

#include "cising/error.hpp"

namespace cising {

void ModelParams::validate() const {
  if (!std::isfinite(V)) throw InvalidArgument("ModelParams: V must be finite");
  if (!std::isfinite(g)) throw InvalidArgument("ModelParams: g must be finite");
  if (!std::isfinite(Gamma) || Gamma <= 0.0)
    throw InvalidArgument("ModelParams: Gamma must be > 0 (got " + std::to_string(Gamma) + ")");
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw InvalidArgument("ModelParams: p must satisfy 0 <= p <= 1 (got " + std::to_string(p) + ")");
  if (N < 0) throw InvalidArgument("ModelParams: N must be non-negative");
}

void ModelParams::validate_quantum() const {
  validate();
  if (N < 1) throw InvalidArgument("ModelParams: N must be >= 1 for quantum solvers");
}

std::string to_string(const ModelParams& params) {
  std::ostringstream os;
  os << "V=" << params.V << " g=" << params.g << " Gamma=" << params.Gamma << " p=" << params.p
     << " N=" << params.N;
  return os.str();
}

}  // namespace cising
