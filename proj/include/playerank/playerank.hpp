#pragma once

// Umbrella header for the rating pipeline (everything except the HTTP layer).

#include "playerank/error.hpp"
#include "playerank/event_model.hpp"
#include "playerank/features.hpp"
#include "playerank/io.hpp"
#include "playerank/linear_svm.hpp"
#include "playerank/live_session.hpp"
#include "playerank/predictor.hpp"
#include "playerank/rating.hpp"
#include "playerank/session_store.hpp"
#include "playerank/synthetic.hpp"
#include "playerank/weight_model.hpp"
