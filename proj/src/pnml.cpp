#include "xnet/pnml.hpp"

#include <expat.h>

#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "xnet/errors.hpp"

namespace xnet {

namespace {

constexpr char kNsSeparator = '|';

// Minimal element tree built from expat callbacks. Names are "uri|local" for
// namespaced elements and bare local names otherwise.
struct XmlNode {
  std::string ns;
  std::string name;
  std::map<std::string, std::string> attributes;
  std::vector<std::unique_ptr<XmlNode>> children;
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;

  const XmlNode* child(std::string_view local) const {
    for (const auto& c : children) {
      if (c->name == local) return c.get();
    }
    return nullptr;
  }

  std::optional<std::string> attribute(const std::string& key) const {
    auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    return it->second;
  }
};

std::pair<std::string, std::string> split_name(const XML_Char* raw) {
  std::string_view name(raw);
  auto pos = name.find(kNsSeparator);
  if (pos == std::string_view::npos) return {"", std::string(name)};
  return {std::string(name.substr(0, pos)), std::string(name.substr(pos + 1))};
}

struct TreeBuilder {
  XML_Parser parser;
  std::unique_ptr<XmlNode> root;
  std::vector<XmlNode*> stack;

  static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* self = static_cast<TreeBuilder*>(data);
    auto node = std::make_unique<XmlNode>();
    std::tie(node->ns, node->name) = split_name(name);
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
      node->attributes[split_name(attrs[i]).second] = attrs[i + 1];
    }
    node->line = XML_GetCurrentLineNumber(self->parser);
    node->column = XML_GetCurrentColumnNumber(self->parser) + 1;
    XmlNode* raw = node.get();
    if (self->stack.empty()) {
      self->root = std::move(node);
    } else {
      self->stack.back()->children.push_back(std::move(node));
    }
    self->stack.push_back(raw);
  }

  static void on_end(void* data, const XML_Char*) { static_cast<TreeBuilder*>(data)->stack.pop_back(); }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<TreeBuilder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<XmlNode> parse_xml(std::string_view bytes) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS("UTF-8", kNsSeparator), &XML_ParserFree);
  if (!parser) throw ParseError("cannot allocate XML parser", 0, 0);
  TreeBuilder builder{parser.get(), nullptr, {}};
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &TreeBuilder::on_start, &TreeBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &TreeBuilder::on_text);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) == XML_STATUS_ERROR) {
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     XML_GetCurrentLineNumber(parser.get()), XML_GetCurrentColumnNumber(parser.get()) + 1);
  }
  if (!builder.root) throw ParseError("empty document", 0, 0);
  return std::move(builder.root);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail_at(const XmlNode& node, const std::string& message) {
  throw ParseError(message, node.line, node.column);
}

TokenCount parse_count(const XmlNode& node, std::string_view text, std::string_view what) {
  const std::string value = trim(text);
  TokenCount out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    fail_at(node, std::string(what) + " must be a non-negative integer, got '" + value + "'");
  return out;
}

// Text of a <name>/<initialMarking>/<inscription> label: <label><text>..</text></label>.
std::optional<std::string> label_text(const XmlNode& parent, std::string_view label) {
  const XmlNode* node = parent.child(label);
  if (node == nullptr) return std::nullopt;
  const XmlNode* text = node->child("text");
  if (text == nullptr) fail_at(*node, "<" + std::string(label) + "> without <text>");
  return text->text;
}

bool is_pnml_ns(const XmlNode& node) { return node.ns.empty() || node.ns == kPnmlNamespace; }

// The single extension element under <toolspecific tool="xnet">, if any.
const XmlNode* extension_of(const XmlNode& element, std::string_view expected) {
  const XmlNode* found = nullptr;
  for (const auto& child : element.children) {
    if (child->name != "toolspecific" || child->attribute("tool") != "xnet") continue;
    for (const auto& ext : child->children) {
      if (ext->ns != kPnmlExtensionNamespace || ext->name != expected)
        fail_at(*ext, "unknown extension element '" + ext->name + "' in <" + element.name + ">");
      if (found != nullptr) fail_at(*ext, "duplicate extension element '" + ext->name + "'");
      found = ext.get();
    }
  }
  return found;
}

void reject_stray_extensions(const XmlNode& node) {
  if (node.ns == kPnmlExtensionNamespace) fail_at(node, "unknown extension element '" + node.name + "'");
  for (const auto& child : node.children) {
    if (child->name == "toolspecific" && child->attribute("tool") == "xnet") continue;
    reject_stray_extensions(*child);
  }
}

struct NetContent {
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<Arc> arcs;
  Marking::Counts marking;
};

void collect(const XmlNode& container, NetContent& out) {
  for (const auto& child : container.children) {
    const XmlNode& node = *child;
    if (!is_pnml_ns(node)) continue;
    if (node.name == "page") {
      collect(node, out);
    } else if (node.name == "place") {
      Place place;
      place.id = node.attribute("id").value_or("");
      if (place.id.empty()) fail_at(node, "<place> without id");
      if (const XmlNode* ext = extension_of(node, "place")) {
        const std::string kind = ext->attribute("kind").value_or("plain");
        auto parsed = place_kind_from_string(kind);
        if (!parsed) fail_at(*ext, "unknown place kind '" + kind + "'");
        place.kind = *parsed;
        place.merge_group = ext->attribute("mergeGroup");
      }
      const auto initial = label_text(node, "initialMarking");
      out.marking[place.id] = initial ? parse_count(node, *initial, "initialMarking") : 0;
      out.places.push_back(std::move(place));
    } else if (node.name == "transition") {
      Transition transition;
      transition.id = node.attribute("id").value_or("");
      if (transition.id.empty()) fail_at(node, "<transition> without id");
      if (const XmlNode* ext = extension_of(node, "transition")) {
        const std::string kind = ext->attribute("kind").value_or("immediate");
        auto parsed = transition_kind_from_string(kind);
        if (!parsed) fail_at(*ext, "unknown transition kind '" + kind + "'");
        transition.kind = *parsed;
        if (auto delay = ext->attribute("delay")) transition.delay = parse_count(*ext, *delay, "delay");
        transition.hook = ext->attribute("hook");
      }
      out.transitions.push_back(std::move(transition));
    } else if (node.name == "arc") {
      Arc arc;
      arc.source = node.attribute("source").value_or("");
      arc.target = node.attribute("target").value_or("");
      if (arc.source.empty() || arc.target.empty()) fail_at(node, "<arc> needs source and target");
      const auto inscription = label_text(node, "inscription");
      arc.weight = inscription ? parse_count(node, *inscription, "inscription") : 1;
      out.arcs.push_back(std::move(arc));
    }
  }
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

PnmlDocument parse_pnml(std::string_view bytes, std::string source_name) {
  const auto root = parse_xml(bytes);
  if (root->name != "pnml" || !is_pnml_ns(*root)) fail_at(*root, "root element must be <pnml>, got <" + root->name + ">");
  reject_stray_extensions(*root);

  PnmlDocument doc;
  doc.source_name = std::move(source_name);
  for (const auto& child : root->children) {
    if (child->name != "net" || !is_pnml_ns(*child)) continue;
    const XmlNode& node = *child;
    NetContent content;
    collect(node, content);
    PnmlNet entry;
    entry.id = node.attribute("id").value_or("");
    if (entry.id.empty()) fail_at(node, "<net> without id");
    entry.name = label_text(node, "name").value_or(entry.id);
    try {
      entry.net = PetriNet(std::move(content.places), std::move(content.transitions), std::move(content.arcs));
    } catch (const ValidationError& e) {
      throw ValidationError("net '" + entry.id + "' in " + doc.source_name + ": " + e.what());
    }
    entry.initial = Marking(std::move(content.marking));
    doc.nets.push_back(std::move(entry));
  }
  return doc;
}

PnmlDocument load_pnml_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pnml(buffer.str(), path.string());
}

std::string serialize_pnml(const PnmlDocument& doc) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml xmlns=\"" << kPnmlNamespace << "\" xmlns:xnet=\"" << kPnmlExtensionNamespace << "\">\n";
  for (const auto& entry : doc.nets) {
    out << "  <net id=\"" << escape(entry.id) << "\" type=\"" << kPtNetType << "\">\n";
    out << "    <name><text>" << escape(entry.name) << "</text></name>\n";
    out << "    <page id=\"" << escape(entry.id) << "-page\">\n";
    for (const auto& p : entry.net.places()) {
      out << "      <place id=\"" << escape(p.id) << "\">\n";
      out << "        <initialMarking><text>" << entry.initial[p.id] << "</text></initialMarking>\n";
      if (p.kind != PlaceKind::plain) {
        out << "        <toolspecific tool=\"xnet\" version=\"1\"><xnet:place kind=\"" << to_string(p.kind) << "\"";
        if (p.merge_group) out << " mergeGroup=\"" << escape(*p.merge_group) << "\"";
        out << "/></toolspecific>\n";
      }
      out << "      </place>\n";
    }
    for (const auto& t : entry.net.transitions()) {
      out << "      <transition id=\"" << escape(t.id) << "\">";
      if (t.kind != TransitionKind::immediate) {
        out << "\n        <toolspecific tool=\"xnet\" version=\"1\"><xnet:transition kind=\"" << to_string(t.kind)
            << "\"";
        if (t.delay) out << " delay=\"" << *t.delay << "\"";
        if (t.hook) out << " hook=\"" << escape(*t.hook) << "\"";
        out << "/></toolspecific>\n      ";
      }
      out << "</transition>\n";
    }
    std::size_t arc_index = 0;
    for (const auto& a : entry.net.arcs()) {
      out << "      <arc id=\"" << escape(entry.id) << "-a" << arc_index++ << "\" source=\"" << escape(a.source)
          << "\" target=\"" << escape(a.target) << "\"><inscription><text>" << a.weight
          << "</text></inscription></arc>\n";
    }
    out << "    </page>\n";
    out << "  </net>\n";
  }
  out << "</pnml>\n";
  return out.str();
}

void save_pnml_file(const PnmlDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_pnml(doc);
}

PnmlDocument make_document(std::string id, PetriNet net, Marking initial) {
  PnmlDocument doc;
  doc.source_name = id;
  PnmlNet entry{id, id, std::move(net), std::move(initial)};
  doc.nets.push_back(std::move(entry));
  return doc;
}

}  // namespace xnet
