#include "swarmform/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "swarmform/error.hpp"

namespace swarmform {

AlignmentTransform align(const std::vector<Vec3>& q, const std::vector<Vec3>& p) {
  if (q.empty() || q.size() != p.size()) throw PreconditionError("alignment needs matching non-empty point sets");
  Vec3 qc = Vec3::Zero(), pc = Vec3::Zero();
  for (std::size_t i = 0; i < q.size(); ++i) {
    qc += q[i];
    pc += p[i];
  }
  qc /= static_cast<double>(q.size());
  pc /= static_cast<double>(p.size());
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vec3 a = p[i] - pc;
    const Vec3 b = q[i] - qc;
    c += a.x() * b.x() + a.y() * b.y();
    s += a.x() * b.y() - a.y() * b.x();
  }
  AlignmentTransform T;
  T.angle = (s == 0.0 && c == 0.0) ? 0.0 : std::atan2(s, c);
  T.t = qc - rotate_z(pc, T.angle);
  return T;
}

AlignmentTransform align(const std::map<AgentId, Vec3>& positions, const std::map<AgentId, Vec3>& targets) {
  if (positions.empty()) throw PreconditionError("alignment needs at least one point");
  if (positions.size() != targets.size()) throw PreconditionError("alignment key sets differ");
  std::vector<Vec3> q, p;
  for (const auto& [id, pos] : positions) {
    auto it = targets.find(id);
    if (it == targets.end()) throw PreconditionError("alignment key sets differ");
    q.push_back(pos);
    p.push_back(it->second);
  }
  return align(q, p);
}

double alignment_objective(const std::vector<Vec3>& q, const std::vector<Vec3>& p, const AlignmentTransform& T) {
  double f = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) f += (q[i] - T.apply(p[i])).squaredNorm();
  return f;
}

std::vector<double> score(const Vec3& agentPos, const AlignmentTransform& aligned,
                          const std::vector<Vec3>& formationPoints, double eps) {
  std::vector<double> c;
  c.reserve(formationPoints.size());
  for (const auto& p : formationPoints) c.push_back(1.0 / ((agentPos - aligned.apply(p)).squaredNorm() + eps));
  return c;
}

AssignmentMap AssignmentMap::identity(std::size_t n) {
  AssignmentMap m;
  m.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.sigma[i] = i;
  return m;
}

bool AssignmentMap::is_bijection() const {
  std::vector<char> seen(sigma.size(), 0);
  for (auto j : sigma) {
    if (j >= sigma.size() || seen[j]) return false;
    seen[j] = 1;
  }
  return true;
}

std::vector<AgentId> AssignmentMap::inverse() const {
  if (!is_bijection()) throw AssignmentError("assignment is not a bijection");
  std::vector<AgentId> inv(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) inv[sigma[i]] = i;
  return inv;
}

CbaaAgentState CbaaAgentState::make(AgentId id, std::vector<double> sc) {
  CbaaAgentState s;
  s.agentId = id;
  s.x.assign(sc.size(), 0);
  s.winningBids.assign(sc.size(), 0.0);
  s.scores = std::move(sc);
  return s;
}

std::optional<PointIndex> CbaaAgentState::assigned() const {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j]) return j;
  return std::nullopt;
}

CbaaAgentState cbaa_auction_phase(CbaaAgentState s) {
  if (s.assigned()) return s;
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < s.scores.size(); ++j) {
    if (s.scores[j] > s.winningBids[j] && (!best || s.scores[j] > s.scores[*best])) best = j;
  }
  if (best) {
    s.x[*best] = 1;
    s.winningBids[*best] = s.scores[*best];
  }
  return s;
}

CbaaAgentState cbaa_consensus_phase(CbaaAgentState s, const std::vector<std::vector<double>>& lists) {
  const std::size_t n = s.winningBids.size();
  for (const auto& l : lists) {
    if (l.size() != n) throw PreconditionError("bid list length mismatch");
    for (std::size_t j = 0; j < n; ++j) s.winningBids[j] = std::max(s.winningBids[j], l[j]);
  }
  if (auto j = s.assigned(); j && s.winningBids[*j] > s.scores[*j]) s.x[*j] = 0;
  ++s.round;
  return s;
}

namespace {

std::string dump_states(const std::vector<CbaaAgentState>& states) {
  std::ostringstream os;
  for (const auto& s : states) {
    os << "\n  agent " << s.agentId + 1 << " point ";
    if (auto j = s.assigned())
      os << *j + 1;
    else
      os << "-";
    os << " bids";
    for (double b : s.winningBids) os << ' ' << b;
  }
  return os.str();
}

}  // namespace

CbaaResult run_cbaa(const Graph& comm, const std::vector<std::vector<double>>& scores) {
  const std::size_t n = comm.size();
  if (scores.size() != n) throw PreconditionError("score matrix must have one row per agent");
  std::vector<CbaaAgentState> st;
  st.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i].size() != n) throw PreconditionError("score matrix must be square");
    std::vector<double> sc = scores[i];
    for (double& c : sc) {
      if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("scores must be positive and finite");
      // Per-agent jitter so that no two agents bid exactly the same value.
      c *= 1.0 + 1e-12 * static_cast<double>(i + 1);
    }
    st.push_back(CbaaAgentState::make(i, std::move(sc)));
  }
  CbaaResult res;
  const std::size_t d = n > 1 ? graph_diameter(comm) : 0;
  res.rounds = n * d;
  if (n == 1) {
    st[0] = cbaa_auction_phase(st[0]);
  }
  for (std::size_t r = 1; r <= res.rounds; ++r) {
    bool changed = false;
    for (auto& s : st) {
      auto next = cbaa_auction_phase(s);
      changed = changed || next.x != s.x || next.winningBids != s.winningBids;
      s = std::move(next);
    }
    std::vector<std::vector<double>> sent(n);
    for (std::size_t i = 0; i < n; ++i) sent[i] = st[i].winningBids;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::vector<double>> inbox;
      for (auto k : comm.neighbors(i)) inbox.push_back(sent[k]);
      auto next = cbaa_consensus_phase(st[i], inbox);
      for (std::size_t j = 0; j < n; ++j)
        if (next.winningBids[j] < st[i].winningBids[j]) res.bidsMonotone = false;
      changed = changed || next.x != st[i].x || next.winningBids != st[i].winningBids;
      st[i] = std::move(next);
    }
    if (changed) res.lastChangeRound = r;
  }
  res.bytesPerLink = res.rounds * cbaa_message_bytes(n);
  res.totalBytes = res.bytesPerLink * 2 * comm.edge_count();

  res.assignment.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = st[i].assigned();
    if (!j) throw AssignmentError("agent " + std::to_string(i + 1) + " unassigned after CBAA" + dump_states(st));
    res.assignment.sigma[i] = *j;
    res.totalScore += scores[i][*j];
  }
  if (!res.assignment.is_bijection()) throw AssignmentError("CBAA produced conflicting assignments" + dump_states(st));
  return res;
}

ReassignmentSchedule::ReassignmentSchedule(double period, double dt) {
  if (!(period > 0.0) || !(dt > 0.0)) throw PreconditionError("reassignment period and dt must be positive");
  periodSteps_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(period / dt)));
}

}  // namespace swarmform
