#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "swarmform/geometry.hpp"
#include "swarmform/graph.hpp"

namespace swarmform {

// q ≈ Rz(angle) p + t.
struct AlignmentTransform {
  double angle = 0.0;
  Vec3 t = Vec3::Zero();

  Mat3 R() const { return rot_z(angle); }
  Vec3 apply(const Vec3& p) const { return rotate_z(p, angle) + t; }
};

// Least-squares z-rotation plus translation taking targets onto positions.
// Maps must have identical key sets. Throws PreconditionError on empty or
// mismatched input.
AlignmentTransform align(const std::map<AgentId, Vec3>& positions, const std::map<AgentId, Vec3>& targets);
AlignmentTransform align(const std::vector<Vec3>& positions, const std::vector<Vec3>& targets);

// sum_k |q_k - (R p_k + t)|^2
double alignment_objective(const std::vector<Vec3>& positions, const std::vector<Vec3>& targets,
                           const AlignmentTransform& T);

inline constexpr double kScoreEpsilon = 1e-9;

// c_j = 1 / (|q - (R p_j + t)|^2 + eps)
std::vector<double> score(const Vec3& agentPos, const AlignmentTransform& aligned,
                          const std::vector<Vec3>& formationPoints, double eps = kScoreEpsilon);

struct AssignmentMap {
  // sigma[i] = formation point of agent i.
  std::vector<PointIndex> sigma;

  static AssignmentMap identity(std::size_t n);
  std::size_t size() const { return sigma.size(); }
  bool is_bijection() const;
  // inverse()[j] = agent at point j. Requires a bijection.
  std::vector<AgentId> inverse() const;

  friend bool operator==(const AssignmentMap&, const AssignmentMap&) = default;
};

struct CbaaAgentState {
  AgentId agentId = 0;
  std::vector<char> x;
  std::vector<double> winningBids;
  std::vector<double> scores;
  std::size_t round = 0;

  static CbaaAgentState make(AgentId id, std::vector<double> scores);
  std::optional<PointIndex> assigned() const;
};

CbaaAgentState cbaa_auction_phase(CbaaAgentState state);
// Throws PreconditionError if a received list has the wrong length.
CbaaAgentState cbaa_consensus_phase(CbaaAgentState state, const std::vector<std::vector<double>>& neighborBidLists);

// Bytes of one bid message: n bids plus a round header, 64 bits each.
inline std::size_t cbaa_message_bytes(std::size_t n) { return 8 * (n + 1); }

struct CbaaResult {
  AssignmentMap assignment;
  // Rounds executed (n * d) and the last round in which any state changed.
  std::size_t rounds = 0;
  std::size_t lastChangeRound = 0;
  // Sum of the caller's (unjittered) scores under the assignment.
  double totalScore = 0.0;
  bool bidsMonotone = true;
  // Bytes sent over each directed link; every link carries the same amount.
  std::size_t bytesPerLink = 0;
  std::size_t totalBytes = 0;
};

// Synchronous CBAA over a connected communication graph; scores[i][j] is
// agent i's score for point j. Throws AssignmentError if the final
// assignment is not a bijection.
CbaaResult run_cbaa(const Graph& comm, const std::vector<std::vector<double>>& scores);

struct HungarianResult {
  std::vector<std::size_t> sigma;
  double total = 0.0;
};

// Exact minimum-cost assignment, O(n^3). Throws PreconditionError if the
// matrix is not square or not finite.
HungarianResult hungarian_min_cost(const Eigen::MatrixXd& cost);
// Exact maximum-score assignment.
HungarianResult hungarian_oracle(const Eigen::MatrixXd& scores);

// Fires every round(period / dt) steps.
class ReassignmentSchedule {
 public:
  ReassignmentSchedule(double period, double dt);
  std::size_t period_steps() const { return periodSteps_; }
  bool due(std::size_t step) const { return step > 0 && step % periodSteps_ == 0; }

 private:
  std::size_t periodSteps_;
};

}  // namespace swarmform
