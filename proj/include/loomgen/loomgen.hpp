#pragma once

// Everything except the HTTP service and CLI, which pull in httplib/CLI11.
#include "loomgen/baselines.hpp"
#include "loomgen/checkpoint.hpp"
#include "loomgen/dataset.hpp"
#include "loomgen/domain_gan.hpp"
#include "loomgen/dual_style.hpp"
#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/models.hpp"
#include "loomgen/rng.hpp"
#include "loomgen/style.hpp"
#include "loomgen/survey.hpp"
#include "loomgen/training.hpp"
#include "loomgen/util.hpp"
