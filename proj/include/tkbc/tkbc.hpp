#pragma once

#include "tkbc/error.hpp"
#include "tkbc/interval.hpp"
#include "tkbc/kb.hpp"
#include "tkbc/dataset.hpp"
#include "tkbc/model.hpp"
#include "tkbc/scoring.hpp"
#include "tkbc/gadgets.hpp"
#include "tkbc/metrics.hpp"
#include "tkbc/parallel.hpp"
#include "tkbc/inference.hpp"
#include "tkbc/evaluation.hpp"
#include "tkbc/training.hpp"
#include "tkbc/diagnostics.hpp"
#include "tkbc/persistence.hpp"
