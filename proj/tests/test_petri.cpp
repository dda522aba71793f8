#include <random>

#include "doctest.h"
#include "support/oracle.hpp"
#include "support/random_nets.hpp"
#include "xnet/errors.hpp"
#include "xnet/petri.hpp"

using namespace xnet;

namespace {

// Two inputs A, B feeding t, which marks C.
PetriNet join_net() {
  return PetriNet({{"A"}, {"B"}, {"C"}}, {{"t"}}, {{"A", "t", 1}, {"B", "t", 1}, {"t", "C", 1}});
}

}  // namespace

TEST_CASE("is_enabled follows input arc weights") {
  const PetriNet net = join_net();
  CHECK(is_enabled(net, Marking{{"A", 1}, {"B", 1}, {"C", 0}}, "t"));
  CHECK_FALSE(is_enabled(net, Marking{{"A", 1}, {"B", 0}, {"C", 0}}, "t"));

  const PetriNet source({{"out"}}, {{"gen"}}, {{"gen", "out", 1}});
  CHECK(is_enabled(source, Marking::zero(source), "gen"));

  CHECK_THROWS_AS(is_enabled(net, Marking::zero(net), "nope"), UnknownElementError);
}

TEST_CASE("fire consumes and produces tokens") {
  const PetriNet net = join_net();
  const Marking before{{"A", 1}, {"B", 1}, {"C", 0}};
  const Marking after = fire(net, before, "t");
  CHECK(after == Marking{{"A", 0}, {"B", 0}, {"C", 1}});
  CHECK(before == Marking{{"A", 1}, {"B", 1}, {"C", 0}});
  // The transition is disabled once its inputs are spent.
  CHECK(enabled_set(net, after).empty());

  SUBCASE("self loop keeps its token") {
    const PetriNet loop({{"p"}}, {{"t"}}, {{"p", "t", 1}, {"t", "p", 1}});
    CHECK(fire(loop, Marking{{"p", 1}}, "t")[("p")] == 1);
  }

  SUBCASE("weighted input") {
    const PetriNet weighted({{"in"}, {"out"}}, {{"t"}}, {{"in", "t", 2}, {"t", "out", 1}});
    CHECK(fire(weighted, Marking{{"in", 3}, {"out", 0}}, "t") == Marking{{"in", 1}, {"out", 1}});
    CHECK_THROWS_AS(fire(weighted, Marking{{"in", 1}, {"out", 0}}, "t"), NotEnabledError);
  }
}

TEST_CASE("enabled_set is sorted and complete") {
  const PetriNet net = join_net();
  CHECK(enabled_set(net, Marking::zero(net)).empty());
  CHECK(enabled_set(net, Marking{{"A", 1}, {"B", 1}, {"C", 0}}) == std::vector<TransitionId>{"t"});

  const PetriNet pair({{"p"}}, {{"b"}, {"a"}}, {{"p", "a", 1}, {"p", "b", 1}});
  CHECK(enabled_set(pair, Marking{{"p", 1}}) == std::vector<TransitionId>{"a", "b"});
}

TEST_CASE("net construction rejects malformed structure") {
  CHECK_THROWS_AS(PetriNet({{"p"}, {"p"}}, {}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p"}}, {{"p"}}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p"}}, {{"t"}}, {{"p", "x", 1}}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p"}, {"q"}}, {{"t"}}, {{"p", "q", 1}}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p"}}, {{"t"}}, {{"p", "t", 0}}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p"}}, {{"t"}}, {{"p", "t", 1}, {"p", "t", 2}}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p", PlaceKind::merge, std::nullopt}}, {}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({{"p", PlaceKind::plain, "g"}}, {}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({}, {{"t", TransitionKind::timed, std::nullopt, std::nullopt}}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({}, {{"t", TransitionKind::external, std::nullopt, std::nullopt}}, {}), ValidationError);
  CHECK_THROWS_AS(PetriNet({}, {{"t", TransitionKind::immediate, 3, std::nullopt}}, {}), ValidationError);
}

TEST_CASE("element order does not affect equality") {
  const PetriNet a({{"x"}, {"y"}}, {{"t"}}, {{"x", "t", 1}, {"t", "y", 1}});
  const PetriNet b({{"y"}, {"x"}}, {{"t"}}, {{"t", "y", 1}, {"x", "t", 1}});
  CHECK(a == b);
}

TEST_CASE("merge_nets collapses merge groups") {
  SUBCASE("handoff between two nets") {
    const PetriNet producer({{"src"}, {"h1", PlaceKind::merge, "handoff"}}, {{"t1"}},
                            {{"src", "t1", 1}, {"t1", "h1", 1}});
    const PetriNet consumer({{"h2", PlaceKind::merge, "handoff"}, {"dst"}}, {{"t2"}},
                            {{"h2", "t2", 1}, {"t2", "dst", 1}});
    const std::vector<PetriNet> nets{producer, consumer};
    const PetriNet merged = merge_nets(nets);

    const PetriNet expected({{"src"}, {"handoff"}, {"dst"}}, {{"t1"}, {"t2"}},
                            {{"src", "t1", 1}, {"t1", "handoff", 1}, {"handoff", "t2", 1}, {"t2", "dst", 1}});
    CHECK(merged == expected);

    const std::vector<Marking> markings{Marking{{"src", 1}, {"h1", 1}}, Marking{{"h2", 2}, {"dst", 0}}};
    CHECK(merge_markings(nets, markings) == Marking{{"src", 1}, {"handoff", 3}, {"dst", 0}});
  }

  SUBCASE("single net without merge places is unchanged") {
    const PetriNet net = join_net();
    const std::vector<PetriNet> nets{net};
    CHECK(merge_nets(nets) == net);
  }

  SUBCASE("a net merged with a renamed copy of itself shares one place") {
    auto copy = [](const std::string& prefix) {
      return PetriNet({{prefix + "in"}, {prefix + "m", PlaceKind::merge, "shared"}}, {{prefix + "t"}, {prefix + "u"}},
                      {{prefix + "in", prefix + "t", 1}, {prefix + "t", prefix + "m", 1}, {prefix + "m", prefix + "u", 1}});
    };
    const std::vector<PetriNet> nets{copy("a."), copy("b.")};
    const PetriNet merged = merge_nets(nets);
    CHECK(merged.places().size() == 3);
    CHECK(merged.arcs().size() == nets[0].arcs().size() + nets[1].arcs().size());
    CHECK(merged.inputs("a.u") == std::vector<ArcRef>{{"shared", 1}});
    CHECK(merged.inputs("b.u") == std::vector<ArcRef>{{"shared", 1}});
  }

  SUBCASE("external kind survives the merge") {
    const PetriNet a({{"x", PlaceKind::external_input, "g"}}, {{"t"}}, {{"x", "t", 1}});
    const PetriNet b({{"y", PlaceKind::merge, "g"}}, {{"u"}}, {{"u", "y", 1}});
    const std::vector<PetriNet> nets{a, b};
    CHECK(merge_nets(nets).place("g").kind == PlaceKind::external_input);
  }

  SUBCASE("errors") {
    const PetriNet a({{"x", PlaceKind::external_input, "g"}}, {{"t"}}, {{"x", "t", 1}});
    const PetriNet b({{"y", PlaceKind::external_output, "g"}}, {{"u"}}, {{"u", "y", 1}});
    CHECK_THROWS_AS(merge_nets(std::vector<PetriNet>{a, b}), CompositionError);

    const PetriNet c({{"p"}}, {{"t"}}, {});
    CHECK_THROWS_AS(merge_nets(std::vector<PetriNet>{c, c}), CompositionError);

    const PetriNet d({{"g"}}, {}, {});
    const PetriNet e({{"m", PlaceKind::merge, "g"}}, {}, {});
    CHECK_THROWS_AS(merge_nets(std::vector<PetriNet>{d, e}), CompositionError);
  }
}

TEST_CASE("token conservation holds on random nets") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto [net, m] = testing::random_net(rng);
    for (int step = 0; step < 10; ++step) {
      const auto enabled = enabled_set(net, m);
      if (enabled.empty()) break;
      const auto& t = enabled[static_cast<std::size_t>(rng() % enabled.size())];
      const Marking next = fire(net, m, t);
      for (const auto& p : net.places()) {
        TokenCount consumed = 0;
        TokenCount produced = 0;
        for (const auto& in : net.inputs(t)) consumed += in.place == p.id ? in.weight : 0;
        for (const auto& out : net.outputs(t)) produced += out.place == p.id ? out.weight : 0;
        REQUIRE(next[p.id] == m[p.id] - consumed + produced);
      }
      m = next;
    }
  }
}

TEST_CASE("engine firing sequences stay inside the brute-force reachability set") {
  std::mt19937 rng(11);
  constexpr std::size_t kDepth = 8;
  for (int trial = 0; trial < 60; ++trial) {
    auto [net, initial] = testing::random_net(rng);
    const oracle::DenseNet dense(net);
    const auto reachable = oracle::reachable_within(dense, dense.to_vec(initial), kDepth);
    for (int walk = 0; walk < 5; ++walk) {
      Marking m = initial;
      for (std::size_t step = 0; step < kDepth; ++step) {
        REQUIRE(reachable.contains(dense.to_vec(m)));
        const auto enabled = enabled_set(net, m);
        for (std::size_t t = 0; t < dense.transitions.size(); ++t) {
          const bool listed = std::find(enabled.begin(), enabled.end(), dense.transitions[t]) != enabled.end();
          REQUIRE(listed == dense.enabled(dense.to_vec(m), t));
        }
        if (enabled.empty()) break;
        m = fire(net, m, enabled[static_cast<std::size_t>(rng() % enabled.size())]);
      }
      REQUIRE(reachable.contains(dense.to_vec(m)));
    }
    CHECK(enabled_set(net, initial) == enabled_set(net, initial));
  }
}
