#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xnet {

using PlaceId = std::string;
using TransitionId = std::string;
using TokenCount = std::uint64_t;
using Ticks = std::uint64_t;

enum class PlaceKind { plain, external_input, external_output, merge };

enum class TransitionKind { immediate, timed, external };

std::string_view to_string(PlaceKind kind);
std::string_view to_string(TransitionKind kind);
std::optional<PlaceKind> place_kind_from_string(std::string_view text);
std::optional<TransitionKind> transition_kind_from_string(std::string_view text);

// A place may carry a merge group when it is a merge place, or when it is an
// external place exported for composition. Plain places never do.
struct Place {
  PlaceId id;
  PlaceKind kind = PlaceKind::plain;
  std::optional<std::string> merge_group;

  bool operator==(const Place&) const = default;
};

struct Transition {
  TransitionId id;
  TransitionKind kind = TransitionKind::immediate;
  std::optional<Ticks> delay;      // timed only
  std::optional<std::string> hook; // external only

  bool operator==(const Transition&) const = default;
};

struct Arc {
  std::string source;
  std::string target;
  TokenCount weight = 1;

  bool operator==(const Arc&) const = default;
};

/// Weighted arc seen from a transition: the place on the other end and the weight.
struct ArcRef {
  PlaceId place;
  TokenCount weight;

  bool operator==(const ArcRef&) const = default;
};

/// Immutable place/transition net. Elements are kept sorted by id (arcs by
/// source then target), so two nets with the same content compare equal
/// regardless of the order they were built in.
class PetriNet {
 public:
  PetriNet() = default;

  /// Validates and builds a net. Throws ValidationError on duplicate ids,
  /// dangling or same-species arcs, zero weights, duplicate (source, target)
  /// pairs, or kind/attribute mismatches.
  PetriNet(std::vector<Place> places, std::vector<Transition> transitions, std::vector<Arc> arcs);

  const std::vector<Place>& places() const noexcept { return places_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  bool has_place(std::string_view id) const;
  bool has_transition(std::string_view id) const;

  /// Throws UnknownElementError for ids not in the net.
  const Place& place(std::string_view id) const;
  const Transition& transition(std::string_view id) const;

  /// Input (place -> t) and output (t -> place) arcs of a transition, sorted by place id.
  const std::vector<ArcRef>& inputs(std::string_view transition) const;
  const std::vector<ArcRef>& outputs(std::string_view transition) const;

  bool operator==(const PetriNet& other) const {
    return places_ == other.places_ && transitions_ == other.transitions_ && arcs_ == other.arcs_;
  }

 private:
  std::size_t transition_index(std::string_view id) const;

  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcRef>> inputs_;
  std::vector<std::vector<ArcRef>> outputs_;
};

/// Token counts for every place of a net.
class Marking {
 public:
  using Counts = std::map<PlaceId, TokenCount, std::less<>>;

  Marking() = default;
  explicit Marking(Counts counts) : counts_(std::move(counts)) {}
  Marking(std::initializer_list<Counts::value_type> counts) : counts_(counts) {}

  /// All places of `net` at zero.
  static Marking zero(const PetriNet& net);

  /// Count for `place`; places absent from the map read as zero.
  TokenCount operator[](std::string_view place) const;

  void set(const PlaceId& place, TokenCount count) { counts_[place] = count; }
  void add(const PlaceId& place, TokenCount tokens) { counts_[place] += tokens; }

  const Counts& counts() const noexcept { return counts_; }
  TokenCount total() const;

  bool operator==(const Marking&) const = default;

 private:
  Counts counts_;
};

/// Throws ValidationError unless `m` has an entry for each place of `net` and nothing else.
void check_marking(const PetriNet& net, const Marking& m);

bool is_enabled(const PetriNet& net, const Marking& m, std::string_view transition);

/// Fires `transition`, returning the successor marking. Throws NotEnabledError
/// if the transition is disabled under `m`.
Marking fire(const PetriNet& net, const Marking& m, std::string_view transition);

/// Enabled transitions in lexicographic id order.
std::vector<TransitionId> enabled_set(const PetriNet& net, const Marking& m);

/// Collapses merge places that share a group label into one place named after
/// the group and returns the union of the inputs. Throws CompositionError on id
/// collisions outside merge groups or on conflicting external kinds.
PetriNet merge_nets(std::span<const PetriNet> nets);

/// Initial marking for the result of merge_nets: merged places hold the sum of
/// their members' tokens.
Marking merge_markings(std::span<const PetriNet> nets, std::span<const Marking> markings);

}  // namespace xnet
