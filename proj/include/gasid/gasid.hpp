#pragma once

// Umbrella header: spectra synthesis, the FNN-OT multi-label classifier,
// the PLS-BR baseline, evaluation metrics and the experiment harness.

#include "gasid/dataset_io.hpp"
#include "gasid/fnn.hpp"
#include "gasid/gaslib.hpp"
#include "gasid/harness.hpp"
#include "gasid/metrics.hpp"
#include "gasid/model_io.hpp"
#include "gasid/ot.hpp"
#include "gasid/pca.hpp"
#include "gasid/pls.hpp"
#include "gasid/rng.hpp"
#include "gasid/svg.hpp"
#include "gasid/synth.hpp"
#include "gasid/textio.hpp"
