#pragma once

#include "riskmap/antenna_registry.hpp"
#include "riskmap/cdr_ingest.hpp"
#include "riskmap/civil_time.hpp"
#include "riskmap/config.hpp"
#include "riskmap/error.hpp"
#include "riskmap/geometry.hpp"
#include "riskmap/heatmap.hpp"
#include "riskmap/home_detection.hpp"
#include "riskmap/ids.hpp"
#include "riskmap/io.hpp"
#include "riskmap/oracles.hpp"
#include "riskmap/pipeline.hpp"
#include "riskmap/risk_model.hpp"
#include "riskmap/social_graph.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/validate.hpp"
