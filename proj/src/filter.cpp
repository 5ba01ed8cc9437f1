#include "nvunmix/filter.hpp"

namespace nvunmix {

TabulatedFilter::TabulatedFilter(Spectrum curve) : curve_(std::move(curve)) {
  const auto& t = curve_.intensities();
  if ((t.array() < 0.0).any() || (t.array() > 1.0).any())
    throw ValidationError("filter table: transmission values must lie in [0, 1]");
}

double transmission(const TabulatedFilter& filter, double lambda) {
  const Spectrum& c = filter.curve();
  if (lambda <= c.min_wavelength()) return c.intensities()[0];
  if (lambda >= c.max_wavelength()) return c.intensities()[c.size() - 1];
  return interpolate(c, lambda);
}

}  // namespace nvunmix
