#pragma once

// Umbrella header for the CSI2Dig pipeline library.

#include "csi2dig/analysis.hpp"
#include "csi2dig/autoencoder.hpp"
#include "csi2dig/checkpoint.hpp"
#include "csi2dig/config.hpp"
#include "csi2dig/csi.hpp"
#include "csi2dig/csv_io.hpp"
#include "csi2dig/dataset_io.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/gradcheck.hpp"
#include "csi2dig/layers.hpp"
#include "csi2dig/model_io.hpp"
#include "csi2dig/optim.hpp"
#include "csi2dig/preprocess.hpp"
#include "csi2dig/rng.hpp"
#include "csi2dig/synth.hpp"
#include "csi2dig/tensor.hpp"
#include "csi2dig/tsnet.hpp"
#include "csi2dig/wavelet.hpp"
