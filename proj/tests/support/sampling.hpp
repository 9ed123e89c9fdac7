#pragma once

#include "ppcm/sampling.hpp"

namespace ppcm::testing {

using ppcm::sample_manipulator;
using ppcm::sample_section;

}  // namespace ppcm::testing
