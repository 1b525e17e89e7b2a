#include <unordered_set>

#include <json.hpp>

#include "cmv/corpus.hpp"
#include "cmv/error.hpp"
#include "internal.hpp"

namespace cmv::corpus {

using nlohmann::json;

namespace {

std::string strip_kind_prefix(std::string id) {
  if (id.size() > 3 && id[0] == 't' && id[2] == '_' && id[1] >= '1' && id[1] <= '6') id.erase(0, 3);
  return id;
}

// Reddit escapes these three entities in bodies; anything else is left alone.
std::string decode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      if (s.compare(i, 4, "&lt;") == 0) {
        out += '<';
        i += 3;
        continue;
      }
      if (s.compare(i, 4, "&gt;") == 0) {
        out += '>';
        i += 3;
        continue;
      }
      if (s.compare(i, 5, "&amp;") == 0) {
        out += '&';
        i += 4;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

std::string author_of(const json& obj) {
  const auto it = obj.find("author");
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    return std::string(kDeletedAuthor);
  }
  return it->get<std::string>();
}

std::string id_of(const json& obj, const char* what) {
  for (const char* key : {"id", "name"}) {
    const auto it = obj.find(key);
    if (it != obj.end() && it->is_string() && !it->get<std::string>().empty()) {
      return strip_kind_prefix(it->get<std::string>());
    }
  }
  throw Error(Errc::MalformedRecord, std::string(what) + " without id");
}

void flatten(const json& node, std::optional<std::string> inherited_parent, TreeRecord& out,
             std::unordered_set<std::string>& seen) {
  if (node.is_array()) {
    for (const auto& c : node) flatten(c, inherited_parent, out, seen);
    return;
  }
  if (!node.is_object()) return;
  // Listing wrappers: {"kind": "Listing", "data": {"children": [...]}} and {"kind": "t1", "data": {...}}.
  if (node.contains("data") && node["data"].is_object()) {
    const auto& data = node["data"];
    if (data.contains("children")) {
      flatten(data["children"], inherited_parent, out, seen);
    } else {
      flatten(data, inherited_parent, out, seen);
    }
    return;
  }
  if (node.value("kind", std::string()) == "more") return;
  CommentRecord c;
  c.id = id_of(node, "comment");
  c.author = author_of(node);
  c.body = decode_entities(node.value("body", std::string()));
  if (!node.contains("created_utc")) throw Error(Errc::MalformedRecord, "comment " + c.id + " missing 'created_utc'");
  c.created_utc = parse_timestamp(node["created_utc"], "comment");
  if (const auto p = node.find("parent_id"); p != node.end() && p->is_string()) {
    c.parent_id = strip_kind_prefix(p->get<std::string>());
  } else {
    c.parent_id = inherited_parent;
  }
  const auto id = c.id;
  if (seen.insert(id).second) out.comments.push_back(std::move(c));
  if (const auto r = node.find("replies"); r != node.end()) flatten(*r, id, out, seen);
}

}  // namespace

TreeRecord record_from_cmv_dump(std::string_view json_line) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedRecord, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(Errc::MalformedRecord, "record is not a JSON object");
  TreeRecord r;
  r.id = id_of(obj, "submission");
  r.author = author_of(obj);
  r.title = decode_entities(obj.value("title", std::string()));
  if (obj.contains("selftext") && obj["selftext"].is_string()) {
    r.body = decode_entities(obj["selftext"].get<std::string>());
  } else {
    r.body = decode_entities(obj.value("body", std::string()));
  }
  if (!obj.contains("created_utc")) throw Error(Errc::MalformedRecord, "submission missing 'created_utc'");
  r.created_utc = parse_timestamp(obj["created_utc"], "submission");
  std::unordered_set<std::string> seen;
  if (const auto it = obj.find("comments"); it != obj.end()) flatten(*it, r.id, r, seen);
  return r;
}

}  // namespace cmv::corpus
