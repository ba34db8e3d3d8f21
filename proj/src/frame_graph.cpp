#include "navkit/frame_graph.hpp"

#include <deque>

#include "navkit/error.hpp"

namespace navkit {

std::string_view to_string(EdgeSource s) {
  switch (s) {
    case EdgeSource::Tracked: return "tracked";
    case EdgeSource::Calibrated: return "calibrated";
    case EdgeSource::Registered: return "registered";
    case EdgeSource::Fixed: return "fixed";
  }
  return "fixed";
}

void FrameGraph::add_frame(const std::string& id) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "frame id is empty");
  adjacency_.try_emplace(id);
}

bool FrameGraph::connected(const std::string& a, const std::string& b) const {
  if (!has_frame(a) || !has_frame(b)) return false;
  if (a == b) return true;
  std::map<std::string, bool> seen{{a, true}};
  std::deque<std::string> queue{a};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (std::size_t e : adjacency_.at(cur)) {
      const auto& edge = edges_[e];
      const std::string& next = edge.parent == cur ? edge.child : edge.parent;
      if (next == b) return true;
      if (seen.emplace(next, true).second) queue.push_back(next);
    }
  }
  return false;
}

void FrameGraph::add_edge(const std::string& parent, const std::string& child,
                          const RigidTransform& parent_from_child, EdgeSource source) {
  if (parent == child) throw Error(ErrorCode::CycleError, "self edge on frame '" + parent + "'");
  if (connected(parent, child)) {
    throw Error(ErrorCode::CycleError, "frames '" + parent + "' and '" + child + "' are already connected");
  }
  add_frame(parent);
  add_frame(child);
  edges_.push_back({parent, child, parent_from_child, source});
  adjacency_[parent].push_back(edges_.size() - 1);
  adjacency_[child].push_back(edges_.size() - 1);
}

void FrameGraph::update_edge(const std::string& parent, const std::string& child,
                             const RigidTransform& parent_from_child) {
  if (!has_frame(parent)) throw Error(ErrorCode::UnknownFrame, "unknown frame '" + parent + "'");
  if (!has_frame(child)) throw Error(ErrorCode::UnknownFrame, "unknown frame '" + child + "'");
  for (auto& e : edges_) {
    if (e.parent == parent && e.child == child) {
      e.transform = parent_from_child;
      return;
    }
    if (e.parent == child && e.child == parent) {
      e.transform = invert(parent_from_child);
      return;
    }
  }
  throw Error(ErrorCode::NoPath, "no edge between '" + parent + "' and '" + child + "'");
}

RigidTransform FrameGraph::resolve(const std::string& from, const std::string& to) const {
  if (!has_frame(from)) throw Error(ErrorCode::UnknownFrame, "unknown frame '" + from + "'");
  if (!has_frame(to)) throw Error(ErrorCode::UnknownFrame, "unknown frame '" + to + "'");
  if (from == to) return RigidTransform::identity();

  // BFS from `from`, remembering the edge used to reach each frame.
  std::map<std::string, std::size_t> via;
  std::deque<std::string> queue{from};
  std::map<std::string, bool> seen{{from, true}};
  while (!queue.empty() && !seen.count(to)) {
    std::string cur = queue.front();
    queue.pop_front();
    for (std::size_t e : adjacency_.at(cur)) {
      const auto& edge = edges_[e];
      const std::string& next = edge.parent == cur ? edge.child : edge.parent;
      if (seen.emplace(next, true).second) {
        via[next] = e;
        queue.push_back(next);
      }
    }
  }
  if (!seen.count(to)) throw Error(ErrorCode::NoPath, "no path from '" + from + "' to '" + to + "'");

  // Walk back from `to`, prepending each hop: result = T^from_x1 * T^x1_x2 * ... * T^xk_to.
  RigidTransform result;
  std::string cur = to;
  while (cur != from) {
    const auto& edge = edges_[via.at(cur)];
    if (edge.child == cur) {
      result = compose(edge.transform, result);
      cur = edge.parent;
    } else {
      result = compose(invert(edge.transform), result);
      cur = edge.child;
    }
  }
  return result;
}

}  // namespace navkit
