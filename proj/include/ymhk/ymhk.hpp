#pragma once

// Umbrella header: the whole simulator in one include.

#include "ymhk/errors.hpp"
#include "ymhk/rng.hpp"
#include "ymhk/parallel.hpp"
#include "ymhk/lattice.hpp"
#include "ymhk/algebra.hpp"
#include "ymhk/fields.hpp"
#include "ymhk/energy.hpp"
#include "ymhk/gradient.hpp"
#include "ymhk/flow.hpp"
#include "ymhk/analysis.hpp"
#include "ymhk/io.hpp"

namespace ymhk {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ymhk
