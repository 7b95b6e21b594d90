/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "tinyml/core/error.hpp"
#include "tinyml/core/matrix.hpp"
#include "tinyml/core/random.hpp"
#include "tinyml/dataset/dataset.hpp"
#include "tinyml/dataset/recording.hpp"
#include "tinyml/dataset/synth.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/dsp/fft.hpp"
#include "tinyml/dsp/filter.hpp"
#include "tinyml/dsp/mfcc.hpp"
#include "tinyml/dsp/spectral.hpp"
#include "tinyml/model/evaluation.hpp"
#include "tinyml/model/network.hpp"
#include "tinyml/model/training.hpp"
#include "tinyml/pipeline/project.hpp"
#include "tinyml/quant/budget.hpp"
#include "tinyml/quant/quantize.hpp"
#include "tinyml/runtime/actions.hpp"
#include "tinyml/runtime/blob.hpp"
#include "tinyml/runtime/stream.hpp"
