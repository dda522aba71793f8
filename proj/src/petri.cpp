#include "xnet/petri.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "xnet/errors.hpp"

namespace xnet {

namespace {

template <class T>
auto find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::lower_bound(items.begin(), items.end(), id,
                             [](const T& item, std::string_view key) { return item.id < key; });
  return (it != items.end() && it->id == id) ? it : items.end();
}

}  // namespace

std::string_view to_string(PlaceKind kind) {
  switch (kind) {
    case PlaceKind::plain: return "plain";
    case PlaceKind::external_input: return "external-input";
    case PlaceKind::external_output: return "external-output";
    case PlaceKind::merge: return "merge";
  }
  return "plain";
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::immediate: return "immediate";
    case TransitionKind::timed: return "timed";
    case TransitionKind::external: return "external";
  }
  return "immediate";
}

std::optional<PlaceKind> place_kind_from_string(std::string_view text) {
  for (auto kind : {PlaceKind::plain, PlaceKind::external_input, PlaceKind::external_output, PlaceKind::merge}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<TransitionKind> transition_kind_from_string(std::string_view text) {
  for (auto kind : {TransitionKind::immediate, TransitionKind::timed, TransitionKind::external}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

PetriNet::PetriNet(std::vector<Place> places, std::vector<Transition> transitions, std::vector<Arc> arcs)
    : places_(std::move(places)), transitions_(std::move(transitions)), arcs_(std::move(arcs)) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(places_.begin(), places_.end(), by_id);
  std::sort(transitions_.begin(), transitions_.end(), by_id);
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });

  std::set<std::string, std::less<>> ids;
  for (const auto& p : places_) {
    if (p.id.empty()) throw ValidationError("place with empty id");
    if (!ids.insert(p.id).second) throw ValidationError("duplicate id '" + p.id + "'");
    if (p.kind == PlaceKind::merge && !p.merge_group)
      throw ValidationError("merge place '" + p.id + "' has no merge group");
    if (p.kind == PlaceKind::plain && p.merge_group)
      throw ValidationError("plain place '" + p.id + "' carries a merge group");
    if (p.merge_group && p.merge_group->empty())
      throw ValidationError("place '" + p.id + "' has an empty merge group");
  }
  for (const auto& t : transitions_) {
    if (t.id.empty()) throw ValidationError("transition with empty id");
    if (!ids.insert(t.id).second) throw ValidationError("duplicate id '" + t.id + "'");
    if ((t.kind == TransitionKind::timed) != t.delay.has_value())
      throw ValidationError("transition '" + t.id + "': delay is required for timed transitions only");
    if ((t.kind == TransitionKind::external) != t.hook.has_value())
      throw ValidationError("transition '" + t.id + "': hook is required for external transitions only");
    if (t.hook && t.hook->empty()) throw ValidationError("transition '" + t.id + "' has an empty hook name");
  }

  inputs_.resize(transitions_.size());
  outputs_.resize(transitions_.size());
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    const Arc& arc = arcs_[i];
    if (i > 0 && arcs_[i - 1].source == arc.source && arcs_[i - 1].target == arc.target)
      throw ValidationError("duplicate arc " + arc.source + " -> " + arc.target);
    if (arc.weight == 0) throw ValidationError("arc " + arc.source + " -> " + arc.target + " has weight 0");
    const bool src_place = has_place(arc.source);
    const bool src_trans = has_transition(arc.source);
    const bool dst_place = has_place(arc.target);
    const bool dst_trans = has_transition(arc.target);
    if (!src_place && !src_trans) throw ValidationError("arc source '" + arc.source + "' does not exist");
    if (!dst_place && !dst_trans) throw ValidationError("arc target '" + arc.target + "' does not exist");
    if (src_place == dst_place)
      throw ValidationError("arc " + arc.source + " -> " + arc.target + " joins two elements of the same kind");
    if (src_place) {
      inputs_[transition_index(arc.target)].push_back({arc.source, arc.weight});
    } else {
      outputs_[transition_index(arc.source)].push_back({arc.target, arc.weight});
    }
  }
  auto by_place = [](const ArcRef& a, const ArcRef& b) { return a.place < b.place; };
  for (auto& v : inputs_) std::sort(v.begin(), v.end(), by_place);
  for (auto& v : outputs_) std::sort(v.begin(), v.end(), by_place);
}

bool PetriNet::has_place(std::string_view id) const { return find_by_id(places_, id) != places_.end(); }

bool PetriNet::has_transition(std::string_view id) const {
  return find_by_id(transitions_, id) != transitions_.end();
}

const Place& PetriNet::place(std::string_view id) const {
  auto it = find_by_id(places_, id);
  if (it == places_.end()) throw UnknownElementError("unknown place '" + std::string(id) + "'");
  return *it;
}

const Transition& PetriNet::transition(std::string_view id) const {
  return transitions_[transition_index(id)];
}

std::size_t PetriNet::transition_index(std::string_view id) const {
  auto it = find_by_id(transitions_, id);
  if (it == transitions_.end()) throw UnknownElementError("unknown transition '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - transitions_.begin());
}

const std::vector<ArcRef>& PetriNet::inputs(std::string_view transition) const {
  return inputs_[transition_index(transition)];
}

const std::vector<ArcRef>& PetriNet::outputs(std::string_view transition) const {
  return outputs_[transition_index(transition)];
}

Marking Marking::zero(const PetriNet& net) {
  Counts counts;
  for (const auto& p : net.places()) counts.emplace(p.id, 0);
  return Marking(std::move(counts));
}

TokenCount Marking::operator[](std::string_view place) const {
  auto it = counts_.find(place);
  return it == counts_.end() ? 0 : it->second;
}

TokenCount Marking::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), TokenCount{0},
                         [](TokenCount acc, const auto& kv) { return acc + kv.second; });
}

void check_marking(const PetriNet& net, const Marking& m) {
  if (m.counts().size() != net.places().size())
    throw ValidationError("marking covers " + std::to_string(m.counts().size()) + " places, net has " +
                          std::to_string(net.places().size()));
  for (const auto& [place, count] : m.counts()) {
    if (!net.has_place(place)) throw ValidationError("marking names unknown place '" + place + "'");
  }
}

bool is_enabled(const PetriNet& net, const Marking& m, std::string_view transition) {
  const auto& inputs = net.inputs(transition);
  return std::all_of(inputs.begin(), inputs.end(), [&](const ArcRef& in) { return m[in.place] >= in.weight; });
}

Marking fire(const PetriNet& net, const Marking& m, std::string_view transition) {
  if (!is_enabled(net, m, transition))
    throw NotEnabledError("transition '" + std::string(transition) + "' is not enabled");
  Marking next = m;
  for (const auto& in : net.inputs(transition)) next.set(in.place, next[in.place] - in.weight);
  for (const auto& out : net.outputs(transition)) next.add(out.place, out.weight);
  return next;
}

std::vector<TransitionId> enabled_set(const PetriNet& net, const Marking& m) {
  std::vector<TransitionId> result;
  for (const auto& t : net.transitions()) {
    if (is_enabled(net, m, t.id)) result.push_back(t.id);
  }
  return result;
}

namespace {

// Resolved id of each element after merging: merge-group members map to the
// group label, everything else keeps its id.
std::string merged_id(const Place& p) { return p.merge_group ? *p.merge_group : p.id; }

}  // namespace

PetriNet merge_nets(std::span<const PetriNet> nets) {
  std::map<std::string, Place, std::less<>> groups;
  std::set<std::string, std::less<>> plain_ids;
  std::vector<Place> places;
  std::vector<Transition> transitions;

  auto claim = [&](const std::string& id) {
    if (!plain_ids.insert(id).second) throw CompositionError("id '" + id + "' appears in more than one net");
  };

  for (const auto& net : nets) {
    for (const auto& p : net.places()) {
      if (!p.merge_group) {
        claim(p.id);
        places.push_back(p);
        continue;
      }
      auto [it, inserted] = groups.try_emplace(*p.merge_group, Place{*p.merge_group, PlaceKind::plain, std::nullopt});
      Place& merged = it->second;
      if (p.kind == PlaceKind::external_input || p.kind == PlaceKind::external_output) {
        if (merged.kind != PlaceKind::plain && merged.kind != p.kind)
          throw CompositionError("merge group '" + *p.merge_group + "' mixes " + std::string(to_string(merged.kind)) +
                                 " and " + std::string(to_string(p.kind)) + " places");
        merged.kind = p.kind;
      }
    }
    for (const auto& t : net.transitions()) {
      claim(t.id);
      transitions.push_back(t);
    }
  }
  for (auto& [label, place] : groups) {
    if (plain_ids.contains(label))
      throw CompositionError("merge group '" + label + "' collides with an element id");
    places.push_back(place);
  }

  std::map<std::pair<std::string, std::string>, TokenCount> weights;
  for (const auto& net : nets) {
    for (const auto& arc : net.arcs()) {
      std::string source = arc.source;
      std::string target = arc.target;
      if (net.has_place(source)) source = merged_id(net.place(source));
      if (net.has_place(target)) target = merged_id(net.place(target));
      weights[{source, target}] += arc.weight;
    }
  }
  std::vector<Arc> arcs;
  arcs.reserve(weights.size());
  for (const auto& [ends, weight] : weights) arcs.push_back({ends.first, ends.second, weight});

  try {
    return PetriNet(std::move(places), std::move(transitions), std::move(arcs));
  } catch (const ValidationError& e) {
    throw CompositionError(std::string("merged net is invalid: ") + e.what());
  }
}

Marking merge_markings(std::span<const PetriNet> nets, std::span<const Marking> markings) {
  if (nets.size() != markings.size()) throw CompositionError("one marking per net is required");
  Marking merged;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    for (const auto& p : nets[i].places()) merged.add(merged_id(p), markings[i][p.id]);
  }
  return merged;
}

}  // namespace xnet
