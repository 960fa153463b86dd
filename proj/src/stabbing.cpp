#include <algorithm>
#include <numeric>
#include <set>

#include "tkdr/geom.hpp"

namespace tkdr {

namespace {
// Word layout of the structure, for block accounting.
constexpr std::uint64_t kNodeWords = 3;  // weight, payload, mod offset
constexpr std::uint64_t kModWords = 2;   // version, next
}  // namespace

PersistentStabbing::PersistentStabbing(const std::vector<WeightedInterval>& intervals) {
  const std::size_t m = intervals.size();
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& x = intervals[a];
    const auto& y = intervals[b];
    return x.weight != y.weight ? x.weight > y.weight : x.payload < y.payload;
  });
  weight_.assign(m + 1, 0);
  payload_.assign(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    weight_[i + 1] = intervals[order[i]].weight;
    payload_[i + 1] = intervals[order[i]].payload;
  }

  // (coordinate, is_insert, node); deletions at end + 1 precede insertions.
  struct Event {
    std::uint64_t coord;
    bool insert;
    std::uint32_t node;
  };
  std::vector<Event> events;
  events.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& iv = intervals[order[i]];
    if (iv.start > iv.end) continue;
    events.push_back({iv.start, true, static_cast<std::uint32_t>(i + 1)});
    events.push_back({static_cast<std::uint64_t>(iv.end) + 1, false, static_cast<std::uint32_t>(i + 1)});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.coord != b.coord ? a.coord < b.coord : a.insert < b.insert;
  });

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> mods(m + 1);
  auto set_next = [&](std::uint32_t node, std::uint32_t version, std::uint32_t next) {
    auto& list = mods[node];
    if (!list.empty() && list.back().first == version) {
      list.back().second = next;
    } else {
      list.emplace_back(version, next);
    }
  };
  std::set<std::uint32_t> live;  // node ids in list order
  for (std::size_t e = 0; e < events.size();) {
    const std::uint64_t coord = events[e].coord;
    const auto version = static_cast<std::uint32_t>(version_coord_.size());
    version_coord_.push_back(coord);
    for (; e < events.size() && events[e].coord == coord; ++e) {
      const std::uint32_t x = events[e].node;
      if (events[e].insert) {
        auto it = live.insert(x).first;
        std::uint32_t pred = it == live.begin() ? 0 : *std::prev(it);
        auto nx = std::next(it);
        std::uint32_t succ = nx == live.end() ? kNil : *nx;
        set_next(pred, version, x);
        set_next(x, version, succ);
      } else {
        auto it = live.find(x);
        std::uint32_t pred = it == live.begin() ? 0 : *std::prev(it);
        auto nx = std::next(it);
        std::uint32_t succ = nx == live.end() ? kNil : *nx;
        set_next(pred, version, succ);
        live.erase(it);
      }
    }
  }
  mod_begin_.assign(m + 2, 0);
  for (std::size_t i = 0; i <= m; ++i) {
    mod_begin_[i + 1] = mod_begin_[i] + static_cast<std::uint32_t>(mods[i].size());
    for (auto [v, nx] : mods[i]) {
      mod_version_.push_back(v);
      mod_next_.push_back(nx);
    }
  }
}

std::uint32_t PersistentStabbing::next_at(std::uint32_t node, std::uint32_t version, BlockCounter* io) const {
  const std::uint64_t mod_base = kNodeWords * weight_.size();
  if (io) io->touch_range(kNodeWords * node, kNodeWords);
  auto first = mod_version_.begin() + mod_begin_[node];
  auto last = mod_version_.begin() + mod_begin_[node + 1];
  auto it = std::upper_bound(first, last, version);
  if (io) {
    const auto n = static_cast<std::uint64_t>(last - first);
    // binary search probes
    std::uint64_t lo = 0, hi = n;
    const std::uint64_t target = static_cast<std::uint64_t>(it - first);
    while (lo < hi) {
      std::uint64_t mid = (lo + hi) / 2;
      io->touch(mod_base + kModWords * (mod_begin_[node] + mid));
      if (mid < target) lo = mid + 1; else hi = mid;
    }
  }
  if (it == first) return kNil;
  return mod_next_[static_cast<std::size_t>(it - mod_version_.begin()) - 1];
}

std::optional<StreamItem> PersistentStabbing::Cursor::next() {
  if (done_ || !s_) return std::nullopt;
  std::uint32_t nx = s_->next_at(node_, version_, io_);
  if (nx == kNil || s_->weight_[nx] < tau_) {
    done_ = true;
    return std::nullopt;
  }
  node_ = nx;
  return StreamItem{s_->weight_[nx], s_->payload_[nx]};
}

PersistentStabbing::Cursor PersistentStabbing::stab(std::uint32_t x, Score tau, BlockCounter* io) const {
  auto it = std::upper_bound(version_coord_.begin(), version_coord_.end(), static_cast<std::uint64_t>(x));
  if (io && !version_coord_.empty()) {
    // predecessor search over the version table
    const std::uint64_t base = kNodeWords * weight_.size() + kModWords * mod_version_.size();
    std::uint64_t lo = 0, hi = version_coord_.size();
    const auto target = static_cast<std::uint64_t>(it - version_coord_.begin());
    while (lo < hi) {
      std::uint64_t mid = (lo + hi) / 2;
      io->touch(base + mid);
      if (mid < target) lo = mid + 1; else hi = mid;
    }
  }
  Cursor c(this, 0, tau, io);
  if (it == version_coord_.begin()) {
    c.done_ = true;
  } else {
    c.version_ = static_cast<std::uint32_t>(it - version_coord_.begin() - 1);
  }
  return c;
}

std::vector<StreamItem> PersistentStabbing::stab_all(std::uint32_t x, Score tau, BlockCounter* io) const {
  std::vector<StreamItem> out;
  auto c = stab(x, tau, io);
  while (auto item = c.next()) out.push_back(*item);
  return out;
}

std::uint64_t PersistentStabbing::word_count() const {
  return kNodeWords * weight_.size() + kModWords * mod_version_.size() + version_coord_.size();
}

void PersistentStabbing::save(Writer& w) const {
  w.put_vec(version_coord_);
  w.put_vec(weight_);
  w.put_vec(payload_);
  w.put_vec(mod_begin_);
  w.put_vec(mod_version_);
  w.put_vec(mod_next_);
}

PersistentStabbing PersistentStabbing::load(Reader& r) {
  PersistentStabbing s;
  s.version_coord_ = r.get_vec<std::uint64_t>();
  s.weight_ = r.get_vec<Score>();
  s.payload_ = r.get_vec<std::uint32_t>();
  s.mod_begin_ = r.get_vec<std::uint32_t>();
  s.mod_version_ = r.get_vec<std::uint32_t>();
  s.mod_next_ = r.get_vec<std::uint32_t>();
  const auto m = s.weight_.size();
  bool ok = m >= 1 && s.payload_.size() == m && s.mod_begin_.size() == m + 1 &&
            s.mod_version_.size() == s.mod_next_.size() && s.mod_begin_.back() == s.mod_version_.size();
  for (auto nx : s.mod_next_) ok = ok && (nx == kNil || nx < m);
  if (!ok) throw Error(ErrorCode::kCorrupt, "stabbing structure");
  return s;
}

}  // namespace tkdr
