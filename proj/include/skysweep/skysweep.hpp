#pragma once

#include "skysweep/common/errors.hpp"
#include "skysweep/common/rng.hpp"
#include "skysweep/core/alloc.hpp"
#include "skysweep/core/checkpoint.hpp"
#include "skysweep/core/gradcheck.hpp"
#include "skysweep/core/ops.hpp"
#include "skysweep/core/optimizer.hpp"
#include "skysweep/core/parameter.hpp"
#include "skysweep/core/tape.hpp"
#include "skysweep/core/tensor.hpp"
#include "skysweep/geometry/camera.hpp"
#include "skysweep/geometry/homography.hpp"
#include "skysweep/geometry/warp.hpp"
#include "skysweep/harness/fusion.hpp"
#include "skysweep/harness/gradcheck_suite.hpp"
#include "skysweep/harness/measure.hpp"
#include "skysweep/harness/metrics.hpp"
#include "skysweep/harness/train.hpp"
#include "skysweep/io/camera_txt.hpp"
#include "skysweep/io/png_io.hpp"
#include "skysweep/net/params.hpp"
#include "skysweep/net/rednet.hpp"
#include "skysweep/synth/dataset.hpp"
#include "skysweep/synth/flight.hpp"
#include "skysweep/synth/render.hpp"
#include "skysweep/synth/scene.hpp"
#include "skysweep/synth/units.hpp"
