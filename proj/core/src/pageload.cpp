#include "adsieve/pageload.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "adsieve/error.hpp"
#include "adsieve/url.hpp"

namespace adsieve {

using nlohmann::json;

namespace {

constexpr std::pair<ResourceKind, std::string_view> kResourceNames[] = {
    {ResourceKind::kDocument, "document"},
    {ResourceKind::kScript, "script"},
    {ResourceKind::kImage, "image"},
    {ResourceKind::kStylesheet, "stylesheet"},
    {ResourceKind::kIframe, "iframe"},
    {ResourceKind::kOther, "other"},
};

constexpr std::pair<InteractionAction, std::string_view> kActionNames[] = {
    {InteractionAction::kInsertNode, "insert_node"},
    {InteractionAction::kModifyAttribute, "modify_attribute"},
    {InteractionAction::kRemoveAttribute, "remove_attribute"},
    {InteractionAction::kAttachListener, "attach_listener"},
};

std::string RequireString(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> OptionalString(const json& obj, const char* key,
                                          std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Initiator ParseInitiator(const json& obj, std::size_t line) {
  auto it = obj.find("initiator");
  if (it == obj.end() || !it->is_object())
    throw ParseError(line, "missing object field 'initiator'");
  const std::string type = RequireString(*it, "type", line);
  Initiator init;
  if (type == "parser") {
    init.type = Initiator::Type::kParser;
  } else if (type == "script") {
    init.type = Initiator::Type::kScript;
    init.id = RequireString(*it, "script_id", line);
  } else if (type == "element") {
    init.type = Initiator::Type::kElement;
    init.id = RequireString(*it, "elem_id", line);
  } else {
    throw ParseError(line, "unknown initiator type '" + type + "'");
  }
  return init;
}

EventPayload ParsePayload(const json& obj, std::size_t line) {
  const std::string type = RequireString(obj, "type", line);
  if (type == "DomNode") {
    DomNode n;
    n.elem_id = RequireString(obj, "elem_id", line);
    n.tag_name = RequireString(obj, "tag_name", line);
    n.parent_id = OptionalString(obj, "parent_id", line);
    n.base_uri = RequireString(obj, "base_uri", line);
    if (auto it = obj.find("attributes"); it != obj.end()) {
      if (!it->is_object()) throw ParseError(line, "'attributes' must be an object");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_string())
          throw ParseError(line, "attribute '" + k + "' must be a string");
        n.attributes[k] = v.get<std::string>();
      }
    }
    return n;
  }
  if (type == "HttpRequest") {
    HttpRequest r;
    r.request_id = RequireString(obj, "request_id", line);
    r.url = RequireString(obj, "url", line);
    r.initiator = ParseInitiator(obj, line);
    const std::string kind = RequireString(obj, "resource_kind", line);
    auto parsed = ParseResourceKind(kind);
    if (!parsed) throw ParseError(line, "unknown resource_kind '" + kind + "'");
    r.resource_kind = *parsed;
    return r;
  }
  if (type == "ScriptUnit") {
    ScriptUnit s;
    s.script_id = RequireString(obj, "script_id", line);
    const std::string scope = RequireString(obj, "scope", line);
    if (scope == "inline") {
      s.scope = ScriptScope::kInline;
    } else if (scope == "referenced") {
      s.scope = ScriptScope::kReferenced;
    } else {
      throw ParseError(line, "unknown scope '" + scope + "'");
    }
    s.source_url = OptionalString(obj, "source_url", line);
    s.attached_to = RequireString(obj, "attached_to", line);
    return s;
  }
  if (type == "JsInteraction") {
    JsInteraction j;
    j.script_id = RequireString(obj, "script_id", line);
    j.target_elem = RequireString(obj, "target_elem", line);
    const std::string action = RequireString(obj, "action", line);
    auto parsed = ParseInteractionAction(action);
    if (!parsed) throw ParseError(line, "unknown action '" + action + "'");
    j.action = *parsed;
    return j;
  }
  throw ParseError(line, "unknown event type '" + type + "'");
}

json ToJson(const Event& event) {
  json out;
  out["seq"] = event.seq;
  std::visit(
      [&out](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DomNode>) {
          out["type"] = "DomNode";
          out["elem_id"] = e.elem_id;
          out["tag_name"] = e.tag_name;
          out["parent_id"] = e.parent_id ? json(*e.parent_id) : json(nullptr);
          out["attributes"] = json::object();
          for (const auto& [k, v] : e.attributes) out["attributes"][k] = v;
          out["base_uri"] = e.base_uri;
        } else if constexpr (std::is_same_v<T, HttpRequest>) {
          out["type"] = "HttpRequest";
          out["request_id"] = e.request_id;
          out["url"] = e.url;
          json init;
          switch (e.initiator.type) {
            case Initiator::Type::kParser:
              init["type"] = "parser";
              break;
            case Initiator::Type::kScript:
              init["type"] = "script";
              init["script_id"] = e.initiator.id;
              break;
            case Initiator::Type::kElement:
              init["type"] = "element";
              init["elem_id"] = e.initiator.id;
              break;
          }
          out["initiator"] = init;
          out["resource_kind"] = ToString(e.resource_kind);
        } else if constexpr (std::is_same_v<T, ScriptUnit>) {
          out["type"] = "ScriptUnit";
          out["script_id"] = e.script_id;
          out["scope"] = ToString(e.scope);
          out["source_url"] = e.source_url ? json(*e.source_url) : json(nullptr);
          out["attached_to"] = e.attached_to;
        } else {
          out["type"] = "JsInteraction";
          out["script_id"] = e.script_id;
          out["target_elem"] = e.target_elem;
          out["action"] = ToString(e.action);
        }
      },
      event.payload);
  return out;
}

}  // namespace

std::string_view ToString(ResourceKind kind) {
  for (const auto& [k, name] : kResourceNames)
    if (k == kind) return name;
  return "other";
}

std::string_view ToString(ScriptScope scope) {
  return scope == ScriptScope::kInline ? "inline" : "referenced";
}

std::string_view ToString(InteractionAction action) {
  for (const auto& [a, name] : kActionNames)
    if (a == action) return name;
  return "insert_node";
}

std::optional<ResourceKind> ParseResourceKind(std::string_view s) {
  for (const auto& [k, name] : kResourceNames)
    if (name == s) return k;
  return std::nullopt;
}

std::optional<InteractionAction> ParseInteractionAction(std::string_view s) {
  for (const auto& [a, name] : kActionNames)
    if (name == s) return a;
  return std::nullopt;
}

void ValidateLog(const PageLoadLog& log) {
  try {
    ParsedUrl page = ParseUrl(log.page_url);
    (void)page;
  } catch (const UrlError& e) {
    throw HeaderError(std::string("page_url is not an absolute url: ") + e.what());
  }

  std::unordered_set<std::string> elements;
  std::unordered_set<std::string> scripts;
  std::int64_t last_seq = std::numeric_limits<std::int64_t>::min();
  std::size_t roots = 0;
  std::size_t documents = 0;

  auto require_elem = [&](const std::string& id, const char* what) {
    if (!elements.contains(id)) throw IntegrityError(id, what);
  };
  auto require_script = [&](const std::string& id, const char* what) {
    if (!scripts.contains(id)) throw IntegrityError(id, what);
  };

  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const Event& event = log.events[i];
    // Line numbers are 1-based and the header occupies line 1.
    const std::size_t line = i + 2;
    if (event.seq < last_seq)
      throw ParseError(line, "sequence number " + std::to_string(event.seq) +
                                 " decreases");
    last_seq = event.seq;
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, DomNode>) {
            if (e.elem_id.empty()) throw ParseError(line, "empty elem_id");
            if (elements.contains(e.elem_id))
              throw IntegrityError(e.elem_id, "duplicate elem_id");
            if (e.parent_id) {
              require_elem(*e.parent_id, "undeclared parent element");
            } else {
              ++roots;
            }
            elements.insert(e.elem_id);
          } else if constexpr (std::is_same_v<T, HttpRequest>) {
            if (e.initiator.type == Initiator::Type::kElement)
              require_elem(e.initiator.id, "undeclared initiator element");
            if (e.initiator.type == Initiator::Type::kScript)
              require_script(e.initiator.id, "undeclared initiator script");
            if (e.resource_kind == ResourceKind::kDocument) ++documents;
          } else if constexpr (std::is_same_v<T, ScriptUnit>) {
            if (scripts.contains(e.script_id))
              throw IntegrityError(e.script_id, "duplicate script_id");
            require_elem(e.attached_to, "script attached to undeclared element");
            if (e.scope == ScriptScope::kReferenced &&
                (!e.source_url || e.source_url->empty()))
              throw ParseError(line, "referenced script '" + e.script_id +
                                         "' has no source_url");
            if (e.scope == ScriptScope::kInline && e.source_url)
              throw ParseError(line, "inline script '" + e.script_id +
                                         "' carries a source_url");
            scripts.insert(e.script_id);
          } else {
            require_script(e.script_id, "interaction by undeclared script");
            require_elem(e.target_elem, "interaction targets undeclared element");
          }
        },
        event.payload);
  }
  if (roots > std::max<std::size_t>(documents, 1))
    throw DataError("DOM has " + std::to_string(roots) + " roots but " +
                    std::to_string(documents) + " document request(s)");
}

PageLoadLog ParseLog(std::string_view text) {
  PageLoadLog log;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "record is not an object");

    if (!have_header) {
      auto url = obj.find("page_url");
      if (url == obj.end() || !url->is_string())
        throw HeaderError("missing page_url on line " + std::to_string(line_no));
      log.page_url = url->get<std::string>();
      if (auto md = obj.find("metadata"); md != obj.end()) {
        if (!md->is_object()) throw HeaderError("metadata must be an object");
        for (const auto& [k, v] : md->items())
          log.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      have_header = true;
      continue;
    }

    Event event;
    auto seq = obj.find("seq");
    if (seq == obj.end() || !seq->is_number_integer())
      throw ParseError(line_no, "missing integer field 'seq'");
    event.seq = seq->get<std::int64_t>();
    event.payload = ParsePayload(obj, line_no);
    log.events.push_back(std::move(event));
  }
  if (!have_header) throw HeaderError("missing page_url header");
  ValidateLog(log);
  return log;
}

PageLoadLog ReadLogFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open log " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseLog(buffer.str());
}

std::string SerializeLog(const PageLoadLog& log) {
  json header;
  header["page_url"] = log.page_url;
  header["metadata"] = json::object();
  for (const auto& [k, v] : log.metadata) header["metadata"][k] = v;
  std::string out = header.dump() + "\n";
  for (const Event& e : log.events) out += ToJson(e).dump() + "\n";
  return out;
}

}  // namespace adsieve
