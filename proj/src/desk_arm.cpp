#include "jmmsim/desk_arm.hpp"

namespace jmmsim {

namespace {
Eigen::Isometry3d translation(double x, double y, double z) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Eigen::Vector3d(x, y, z);
  return t;
}
}  // namespace

KinematicChain make_desk_chain() {
  std::vector<RevoluteJoint> joints(4);
  joints[0].axis = Eigen::Vector3d::UnitY();  // shoulder pitch
  joints[0].min_angle = -1.3;
  joints[0].max_angle = 1.3;
  joints[1].axis = Eigen::Vector3d::UnitX();  // shoulder roll
  joints[1].min_angle = -0.5;
  joints[1].max_angle = 1.2;
  joints[2].axis = Eigen::Vector3d::UnitZ();  // shoulder yaw
  joints[2].min_angle = -1.0;
  joints[2].max_angle = 1.0;
  joints[3].axis = Eigen::Vector3d::UnitY();  // elbow pitch
  joints[3].parent_offset = translation(0.0, 0.0, -300.0);
  joints[3].min_angle = 0.0;
  joints[3].max_angle = 2.1;

  std::vector<LinkInertia> inertias(4);
  inertias[2].mass = 0.35;  // upper arm
  inertias[2].com = Eigen::Vector3d(0.0, 0.0, -150.0);
  inertias[3].mass = 0.2;  // forearm
  inertias[3].com = Eigen::Vector3d(0.0, 0.0, -125.0);

  return KinematicChain(std::move(joints), std::move(inertias),
                        translation(0.0, 0.0, -250.0));
}

MuscleRouting make_desk_routing(const KinematicChain& chain) {
  auto vp = [](int link, double x, double y, double z) {
    return ViaPoint{link, Eigen::Vector3d(x, y, z)};
  };
  std::vector<Muscle> muscles;
  // Shoulder group. Link 3 is the upper arm, link 4 the forearm. Attachment
  // points are placed so the column sums of the moment-arm matrix nearly
  // vanish at the rest posture: the bias tensions then cancel and the arm
  // hangs at rest without chronic co-contraction.
  muscles.push_back({{vp(0, 80.0, 0.0, 0.0), vp(3, 35.8, 0.0, -120.0)}});     // front
  muscles.push_back({{vp(0, -80.0, 0.0, 0.0), vp(3, -23.6, 0.0, -120.0)}});   // rear
  muscles.push_back({{vp(0, 15.2, 70.0, 40.0), vp(3, -49.7, 50.7, -100.0)}}); // lateral
  muscles.push_back({{vp(0, 1.8, -70.0, 40.0), vp(3, -5.0, -15.0, -100.0)}}); // medial
  muscles.push_back({{vp(0, -45.0, 85.0, 10.0), vp(3, 10.0, 42.1, -50.0)}});  // rotator
  // Biarticular shoulder-elbow flexor (biceps analogue). The via point just
  // past the elbow acts as a pulley so the elbow moment arm keeps its sign
  // throughout the flexion range.
  muscles.push_back({{vp(0, 29.2, -66.5, 25.0), vp(3, 25.0, -25.0, -150.0),
                      vp(3, 34.0, 0.0, -310.0), vp(4, 26.0, 0.0, -18.0)}});
  // Elbow pair completing the triple.
  muscles.push_back({{vp(3, 26.0, 0.0, -220.0), vp(3, 34.0, 0.0, -310.0),
                      vp(4, 16.0, 0.0, -20.0)}});                              // brachialis
  muscles.push_back({{vp(3, -34.2, 0.0, -150.0), vp(4, -32.1, 0.0, -40.0)}});  // triceps
  return MuscleRouting(std::move(muscles), chain);
}

}  // namespace jmmsim
