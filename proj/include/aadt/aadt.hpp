#pragma once

#include "aadt/domain.hpp"
#include "aadt/error.hpp"
#include "aadt/estimators.hpp"
#include "aadt/evaluation.hpp"
#include "aadt/ingest.hpp"
#include "aadt/svr.hpp"
#include "aadt/tuning.hpp"
