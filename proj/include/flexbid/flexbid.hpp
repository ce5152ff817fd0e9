#pragma once

#include "flexbid/bidding.hpp"
#include "flexbid/config.hpp"
#include "flexbid/csv.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/evaluation.hpp"
#include "flexbid/flexibility.hpp"
#include "flexbid/harness.hpp"
#include "flexbid/market_data.hpp"
#include "flexbid/parallel.hpp"
#include "flexbid/random.hpp"
#include "flexbid/report.hpp"
#include "flexbid/scenarios.hpp"
#include "flexbid/time.hpp"
