#pragma once

// Everything: field model, detection, forward simulation, inverse estimates,
// matching, evaluation and file formats.

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/fit.hpp"
#include "crossmatch/core/geometry.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/detection/zscore.hpp"
#include "crossmatch/eval/metrics.hpp"
#include "crossmatch/eval/ranking.hpp"
#include "crossmatch/inverse/classifier.hpp"
#include "crossmatch/inverse/cluster.hpp"
#include "crossmatch/inverse/inverse.hpp"
#include "crossmatch/inverse/motion.hpp"
#include "crossmatch/io/config.hpp"
#include "crossmatch/io/digest.hpp"
#include "crossmatch/io/json_io.hpp"
#include "crossmatch/io/readings_csv.hpp"
#include "crossmatch/io/report.hpp"
#include "crossmatch/matching/activation_matrix.hpp"
#include "crossmatch/matching/distance.hpp"
#include "crossmatch/matching/match.hpp"
#include "crossmatch/pipeline.hpp"
#include "crossmatch/sim/geometry.hpp"
#include "crossmatch/sim/library.hpp"
#include "crossmatch/sim/simulate.hpp"
