#pragma once

#include "haptic_guide/actuation.hpp"
#include "haptic_guide/clustering.hpp"
#include "haptic_guide/confusion.hpp"
#include "haptic_guide/cues.hpp"
#include "haptic_guide/device_config.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/features.hpp"
#include "haptic_guide/kinematics.hpp"
#include "haptic_guide/pose.hpp"
#include "haptic_guide/rng.hpp"
#include "haptic_guide/signal.hpp"
#include "haptic_guide/stats.hpp"
#include "haptic_guide/summary.hpp"
#include "haptic_guide/synth.hpp"
#include "haptic_guide/trial_log.hpp"
