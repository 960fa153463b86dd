#include <algorithm>
#include <deque>

#include "tkdr/geom.hpp"

namespace tkdr {

namespace {
bool higher(const Point2& a, const Point2& b) {
  return a.y != b.y ? a.y > b.y : a.payload < b.payload;
}
}  // namespace

ThreeSided::ThreeSided(std::vector<Point2> points, std::uint64_t block_words)
    : capacity_(std::max<std::uint64_t>(1, block_words)) {
  const std::uint64_t fanout = std::max<std::uint64_t>(2, block_words);
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x != b.x ? a.x < b.x : a.payload < b.payload;
  });
  if (points.empty()) return;
  points_.reserve(points.size());

  // BFS build; each work item is an x-sorted point set destined for one node.
  struct Work {
    std::vector<Point2> pts;
    std::uint32_t node;
  };
  nodes_.emplace_back();
  std::deque<Work> queue;
  queue.push_back({std::move(points), 0});
  while (!queue.empty()) {
    Work w = std::move(queue.front());
    queue.pop_front();
    Node& node = nodes_[w.node];
    node.x_lo = w.pts.front().x;
    node.x_hi = w.pts.back().x;

    std::vector<Point2> top = w.pts;
    const std::size_t keep = std::min<std::size_t>(capacity_, top.size());
    std::partial_sort(top.begin(), top.begin() + keep, top.end(), higher);
    top.resize(keep);
    node.first_point = static_cast<std::uint32_t>(points_.size());
    node.point_count = static_cast<std::uint32_t>(keep);
    points_.insert(points_.end(), top.begin(), top.end());

    std::vector<Point2> rest;
    rest.reserve(w.pts.size() - keep);
    // `top` is the keep highest under a strict total order; a point stays
    // iff it ranks below the lowest kept one.
    const Point2 cut = top.back();
    for (const auto& p : w.pts) {
      if (higher(cut, p)) rest.push_back(p);
    }
    if (rest.empty()) continue;
    const std::size_t parts = std::min<std::size_t>(fanout, rest.size());
    nodes_[w.node].first_child = static_cast<std::uint32_t>(nodes_.size());
    nodes_[w.node].child_count = static_cast<std::uint32_t>(parts);
    for (std::size_t c = 0; c < parts; ++c) {
      const std::size_t lo = rest.size() * c / parts;
      const std::size_t hi = rest.size() * (c + 1) / parts;
      nodes_.emplace_back();
      queue.push_back({std::vector<Point2>(rest.begin() + lo, rest.begin() + hi),
                       static_cast<std::uint32_t>(nodes_.size() - 1)});
    }
  }
}

void ThreeSided::query(std::uint32_t x1, std::uint32_t x2, std::uint32_t tau, std::vector<Point2>& out,
                       IoTape* tape, Phase phase) const {
  if (nodes_.empty() || x1 > x2) return;
  BlockCounter io(tape, phase);
  const std::uint64_t point_base = kNodeWords * nodes_.size();
  std::vector<std::uint32_t> stack{0};
  io.touch_range(0, kNodeWords);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    bool all_high = node.point_count > 0;
    for (std::uint32_t i = 0; i < node.point_count; ++i) {
      const Point2& p = points_[node.first_point + i];
      io.touch_range(point_base + 3ull * (node.first_point + i), 3);
      if (p.y < tau) {
        all_high = false;
        break;
      }
      if (p.x >= x1 && p.x <= x2) out.push_back(p);
    }
    // Descendants lie below every stored point; they can only qualify when
    // the whole node did.
    if (!all_high || node.child_count == 0) continue;
    io.touch_range(kNodeWords * node.first_child, kNodeWords * node.child_count);
    for (std::uint32_t c = 0; c < node.child_count; ++c) {
      const Node& child = nodes_[node.first_child + c];
      if (child.x_hi < x1 || child.x_lo > x2) continue;
      stack.push_back(node.first_child + c);
    }
  }
}

std::vector<Point2> ThreeSided::query_sorted(std::uint32_t x1, std::uint32_t x2, std::uint32_t tau) const {
  std::vector<Point2> out;
  query(x1, x2, tau, out);
  std::sort(out.begin(), out.end(), higher);
  return out;
}

void ThreeSided::save(Writer& w) const {
  w.put<std::uint64_t>(capacity_);
  std::vector<std::uint32_t> flat;
  for (const auto& n : nodes_) {
    flat.insert(flat.end(), {n.first_point, n.point_count, n.first_child, n.child_count, n.x_lo, n.x_hi});
  }
  w.put_vec(flat);
  std::vector<std::uint32_t> pts;
  for (const auto& p : points_) pts.insert(pts.end(), {p.x, p.y, p.payload});
  w.put_vec(pts);
}

ThreeSided ThreeSided::load(Reader& r) {
  ThreeSided t;
  t.capacity_ = r.get<std::uint64_t>();
  auto flat = r.get_vec<std::uint32_t>();
  auto pts = r.get_vec<std::uint32_t>();
  if (flat.size() % kNodeWords || pts.size() % 3) throw Error(ErrorCode::kCorrupt, "priority search tree");
  for (std::size_t i = 0; i < flat.size(); i += kNodeWords) {
    t.nodes_.push_back(Node{flat[i], flat[i + 1], flat[i + 2], flat[i + 3], flat[i + 4], flat[i + 5]});
  }
  for (std::size_t i = 0; i < pts.size(); i += 3) t.points_.push_back(Point2{pts[i], pts[i + 1], pts[i + 2]});
  for (const auto& n : t.nodes_) {
    if (n.first_point + static_cast<std::uint64_t>(n.point_count) > t.points_.size() ||
        n.first_child + static_cast<std::uint64_t>(n.child_count) > t.nodes_.size()) {
      throw Error(ErrorCode::kCorrupt, "priority search tree");
    }
  }
  return t;
}

}  // namespace tkdr
