#pragma once

#include <string_view>

#include "noisecal/augment.hpp"
#include "noisecal/calibration.hpp"
#include "noisecal/dataset.hpp"
#include "noisecal/error.hpp"
#include "noisecal/image.hpp"
#include "noisecal/metrics.hpp"
#include "noisecal/noise.hpp"
#include "noisecal/random.hpp"
#include "noisecal/serialization.hpp"

namespace noisecal {

std::string_view library_version() noexcept;

}  // namespace noisecal
