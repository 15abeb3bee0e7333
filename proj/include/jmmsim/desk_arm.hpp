#pragma once

#include "jmmsim/kinematics.hpp"
#include "jmmsim/routing.hpp"

namespace jmmsim {

/// Default 4-DOF desk arm: shoulder pitch/roll/yaw stacked at one origin plus
/// an elbow pitch, upper arm 300 mm and forearm 250 mm hanging along -Z at
/// theta = 0. Smallest chain with polyarticular coupling.
KinematicChain make_desk_chain();

/// Default 8-muscle routing: five shoulder muscles covering pitch/roll/yaw in
/// both directions, a biarticular shoulder-elbow flexor, and the elbow triple
/// (brachialis/biceps/triceps analogue).
MuscleRouting make_desk_routing(const KinematicChain& chain);

/// Indices of the elbow muscles within the desk routing.
struct DeskElbowMuscles {
  int biceps = 5;      // biarticular flexor
  int brachialis = 6;  // monoarticular flexor
  int triceps = 7;     // extensor
};

}  // namespace jmmsim
