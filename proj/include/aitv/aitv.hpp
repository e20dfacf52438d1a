#pragma once

#include "aitv/errors.hpp"
#include "aitv/fft.hpp"
#include "aitv/image.hpp"
#include "aitv/image_io.hpp"
#include "aitv/manifest.hpp"
#include "aitv/metrics.hpp"
#include "aitv/noise.hpp"
#include "aitv/prox.hpp"
#include "aitv/solver.hpp"
#include "aitv/sweep.hpp"
