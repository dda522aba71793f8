#include "xnet/command.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "xnet/errors.hpp"

namespace xnet {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<std::string_view, Speed>, 3> kVerbs{{
    {"amble", Speed::slow},
    {"move", Speed::normal},
    {"dash", Speed::fast},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_word(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

std::optional<Speed> verb_speed(std::string_view word) {
  for (const auto& [verb, speed] : kVerbs) {
    if (verb == word) return speed;
  }
  return std::nullopt;
}

std::string_view verb_for(Speed speed) {
  for (const auto& [verb, s] : kVerbs) {
    if (s == speed) return verb;
  }
  return "move";
}

/// Splits on whitespace and commas after dropping trailing punctuation.
std::vector<std::string> tokenize(std::string_view text) {
  while (!text.empty() && (std::isspace(static_cast<unsigned char>(text.back())) || text.back() == '!' ||
                           text.back() == '.' || text.back() == '?')) {
    text.remove_suffix(1);
  }
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

struct Production {
  std::vector<std::string_view> words;  // "*" matches any single word
  std::string_view text;                // rendered with {agent}
};

const std::array<Production, 5> kProductions{{
    {{"move", "to", "the", "*", "box"}, "move to the <color> box!"},
    {{"amble", "to", "the", "*", "box"}, "amble to the <color> box!"},
    {{"dash", "to", "the", "*", "box"}, "dash to the <color> box!"},
    {{"stop", "moving"}, "stop moving!"},
    {{"continue", "moving"}, "continue moving!"},
}};

std::size_t word_distance(const std::vector<std::string>& words, const Production& p) {
  const std::size_t n = words.size();
  const std::size_t m = p.words.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = p.words[j - 1] == "*" || p.words[j - 1] == words[i - 1];
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (same ? 0 : 1)});
    }
  }
  return d[n][m];
}

std::string nearest_production(const std::string& agent, const std::vector<std::string>& words,
                               const std::vector<std::string>& colors) {
  const Production* best = &kProductions.front();
  std::size_t best_distance = word_distance(words, *best);
  for (const auto& p : kProductions) {
    const std::size_t dist = word_distance(words, p);
    if (dist < best_distance) {
      best = &p;
      best_distance = dist;
    }
  }
  std::string text(best->text);
  if (const auto slot = text.find("<color>"); slot != std::string::npos) {
    auto it = std::find_first_of(words.begin(), words.end(), colors.begin(), colors.end());
    if (it != words.end()) text.replace(slot, 7, *it);
  }
  return agent + ", " + text;
}

}  // namespace

std::string_view to_string(ActSpecKind kind) { return kind == ActSpecKind::command ? "command" : "notification"; }

std::string_view to_string(Predicate predicate) {
  switch (predicate) {
    case Predicate::move: return "move";
    case Predicate::stop: return "stop";
    case Predicate::continue_: return "continue";
    case Predicate::redirect_implicit: return "redirect-implicit";
  }
  return "move";
}

std::string_view to_string(Speed speed) {
  switch (speed) {
    case Speed::slow: return "slow";
    case Speed::normal: return "normal";
    case Speed::fast: return "fast";
  }
  return "normal";
}

bool ActSpec::same_fields(const ActSpec& other) const {
  ActSpec a = *this;
  a.sequence = other.sequence;
  return a == other;
}

void validate(const ActSpec& spec) {
  if (spec.kind == ActSpecKind::command && !spec.predicate) throw ValidationError("command ActSpec without predicate");
  const bool move = spec.predicate == Predicate::move;
  if (move != spec.goal.has_value()) throw ValidationError("goal must be present exactly when the predicate is move");
  if (move != spec.speed.has_value()) throw ValidationError("speed must be present exactly when the predicate is move");
  if (spec.agent.empty()) throw ValidationError("ActSpec without agent");
}

std::vector<std::string> default_colors() { return {"red", "green", "blue", "yellow"}; }

ActSpec parse_command(std::string_view text, const std::vector<std::string>& colors, std::uint64_t sequence) {
  const auto tokens = tokenize(text);
  const std::string agent = !tokens.empty() && is_identifier(tokens.front()) ? tokens.front() : "Robot1";
  std::vector<std::string> words;
  for (std::size_t i = 1; i < tokens.size(); ++i) words.push_back(lower(tokens[i]));

  auto fail = [&](const std::string& why) -> ActSpec {
    throw CommandParseError(why, nearest_production(agent, words, colors));
  };
  if (tokens.empty()) return fail("empty command");
  if (!is_identifier(tokens.front())) return fail("expected a robot name, got \"" + tokens.front() + "\"");

  ActSpec spec;
  spec.kind = ActSpecKind::command;
  spec.agent = agent;
  spec.sequence = sequence;

  if (words.size() == 2 && words[1] == "moving" && (words[0] == "stop" || words[0] == "continue")) {
    spec.predicate = words[0] == "stop" ? Predicate::stop : Predicate::continue_;
    return spec;
  }
  if (words.size() == 5 && verb_speed(words[0]) && words[1] == "to" && words[2] == "the" && words[4] == "box" &&
      is_word(words[3])) {
    if (std::find(colors.begin(), colors.end(), words[3]) == colors.end()) {
      std::string known;
      for (const auto& c : colors) known += (known.empty() ? "" : ", ") + c;
      throw VocabularyError("unknown color \"" + words[3] + "\" (known: " + known + ")");
    }
    spec.predicate = Predicate::move;
    spec.speed = verb_speed(words[0]);
    spec.goal = ObjectDescriptor{words[3], "box"};
    return spec;
  }
  return fail("no command matches \"" + std::string(text) + "\"");
}

std::string render_command(const ActSpec& spec) {
  if (spec.kind != ActSpecKind::command || !spec.predicate) throw ValidationError("only commands have a surface form");
  switch (*spec.predicate) {
    case Predicate::move:
      validate(spec);
      return spec.agent + ", " + std::string(verb_for(*spec.speed)) + " to the " + spec.goal->color + " " +
             spec.goal->shape + "!";
    case Predicate::stop: return spec.agent + ", stop moving!";
    case Predicate::continue_: return spec.agent + ", continue moving!";
    case Predicate::redirect_implicit: break;
  }
  throw ValidationError("implicit redirects have no surface form");
}

json to_json(const ActSpec& spec) {
  json j{{"kind", to_string(spec.kind)}, {"agent", spec.agent}, {"sequence", spec.sequence}};
  if (spec.predicate) j["predicate"] = to_string(*spec.predicate);
  if (spec.speed) j["speed"] = to_string(*spec.speed);
  if (spec.goal) j["goal"] = {{"color", spec.goal->color}, {"shape", spec.goal->shape}};
  if (!spec.topic.empty()) j["topic"] = spec.topic;
  if (!spec.message.empty()) j["message"] = spec.message;
  if (spec.object) {
    j["object"] = {{"name", spec.object->name},
                   {"color", spec.object->color},
                   {"position", {spec.object->position.x, spec.object->position.y}},
                   {"size", spec.object->size}};
  }
  return j;
}

ActSpec actspec_from_json(const json& j) {
  try {
    ActSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "command") {
      spec.kind = ActSpecKind::command;
    } else if (kind == "notification") {
      spec.kind = ActSpecKind::notification;
    } else {
      throw ValidationError("unknown ActSpec kind \"" + kind + "\"");
    }
    spec.agent = j.at("agent").get<std::string>();
    spec.sequence = j.value("sequence", std::uint64_t{0});
    if (j.contains("predicate")) {
      const auto p = j.at("predicate").get<std::string>();
      if (p == "move") spec.predicate = Predicate::move;
      else if (p == "stop") spec.predicate = Predicate::stop;
      else if (p == "continue") spec.predicate = Predicate::continue_;
      else if (p == "redirect-implicit") spec.predicate = Predicate::redirect_implicit;
      else throw ValidationError("unknown predicate \"" + p + "\"");
    }
    if (j.contains("speed")) {
      const auto s = j.at("speed").get<std::string>();
      if (s == "slow") spec.speed = Speed::slow;
      else if (s == "normal") spec.speed = Speed::normal;
      else if (s == "fast") spec.speed = Speed::fast;
      else throw ValidationError("unknown speed \"" + s + "\"");
    }
    if (j.contains("goal")) {
      spec.goal = ObjectDescriptor{j.at("goal").at("color").get<std::string>(), j.at("goal").value("shape", "box")};
    }
    spec.topic = j.value("topic", "");
    spec.message = j.value("message", "");
    if (j.contains("object")) {
      const auto& o = j.at("object");
      const auto& pos = o.at("position");
      spec.object = ReportedObject{o.at("name").get<std::string>(), o.value("color", ""),
                                   Vec2{pos.at(0).get<double>(), pos.at(1).get<double>()}, o.value("size", 0.0)};
    }
    if (spec.kind == ActSpecKind::command || spec.predicate) validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ActSpec: ") + e.what());
  }
}

}  // namespace xnet
