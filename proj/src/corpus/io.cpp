#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cmv/corpus.hpp"
#include "cmv/error.hpp"
#include "cmv/util.hpp"
#include "internal.hpp"

namespace cmv::corpus {

using nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* key, const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(Errc::MalformedRecord, std::string(what) + " missing '" + key + "'");
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw Error(Errc::MalformedRecord, std::string(what) + " field '" + key + "' is not a string");
}

std::string optional_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

std::int64_t parse_timestamp(const json& value, const char* what) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) return static_cast<std::int64_t>(std::floor(value.get<double>()));
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size() && std::isfinite(d)) return static_cast<std::int64_t>(std::floor(d));
    } catch (const std::exception&) {
    }
  }
  throw Error(Errc::MalformedRecord, std::string(what) + " has an invalid created_utc");
}

TreeRecord record_from_json(std::string_view json_line) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedRecord, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(Errc::MalformedRecord, "record is not a JSON object");
  TreeRecord r;
  r.id = required_string(obj, "id", "record");
  r.author = required_string(obj, "author", "record");
  r.title = optional_string(obj, "title");
  r.body = optional_string(obj, "body");
  if (!obj.contains("created_utc")) throw Error(Errc::MalformedRecord, "record missing 'created_utc'");
  r.created_utc = parse_timestamp(obj["created_utc"], "record");
  if (const auto it = obj.find("comments"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(Errc::MalformedRecord, "'comments' is not an array");
    for (const auto& c : *it) {
      if (!c.is_object()) throw Error(Errc::MalformedRecord, "comment is not an object");
      CommentRecord cr;
      cr.id = required_string(c, "id", "comment");
      const auto a = c.find("author");
      cr.author = (a != c.end() && a->is_string()) ? a->get<std::string>() : std::string(kDeletedAuthor);
      cr.body = optional_string(c, "body");
      if (!c.contains("created_utc")) throw Error(Errc::MalformedRecord, "comment " + cr.id + " missing 'created_utc'");
      cr.created_utc = parse_timestamp(c["created_utc"], "comment");
      if (const auto p = c.find("parent_id"); p != c.end() && p->is_string()) {
        cr.parent_id = p->get<std::string>();
      }
      r.comments.push_back(std::move(cr));
    }
  }
  return r;
}

std::string record_to_json(const TreeRecord& record) {
  json obj;
  obj["id"] = record.id;
  obj["title"] = record.title;
  obj["author"] = record.author;
  obj["body"] = record.body;
  obj["created_utc"] = record.created_utc;
  json comments = json::array();
  for (const auto& c : record.comments) {
    json jc;
    jc["id"] = c.id;
    jc["author"] = c.author;
    jc["body"] = c.body;
    jc["created_utc"] = c.created_utc;
    jc["parent_id"] = c.parent_id ? *c.parent_id : record.id;
    comments.push_back(std::move(jc));
  }
  obj["comments"] = std::move(comments);
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

TreeRecord to_record(const DiscussionTree& tree) {
  TreeRecord r;
  r.id = tree.id();
  r.title = tree.title();
  r.author = tree.op_author();
  r.body = tree.root().body_raw;
  r.created_utc = tree.created_utc();
  for (const auto& n : tree.nodes()) {
    r.comments.push_back({n.id, n.author, n.created_utc, n.body_raw, n.parent_id});
  }
  return r;
}

ReadResult parse_corpus_lines(std::span<const std::string> lines, InputFormat format,
                              const ParseOptions& options) {
  ReadResult out;
  std::unordered_set<std::string> seen_ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (trim(lines[i]).empty()) continue;
    ++out.lines;
    try {
      const auto record = format == InputFormat::Normalized ? record_from_json(lines[i])
                                                            : record_from_cmv_dump(lines[i]);
      if (!seen_ids.insert(record.id).second) {
        throw Error(Errc::MalformedRecord, "duplicate tree id " + record.id);
      }
      auto tree = parse_tree(record, options);
      if (tree.orphan_count() > 0) {
        out.orphans += tree.orphan_count();
        out.diagnostics.push_back({line_no, "Orphans",
                                   std::to_string(tree.orphan_count()) + " orphaned comment(s) dropped from " +
                                       tree.id()});
      }
      if (tree.dangling_delta_count() > 0) {
        out.diagnostics.push_back({line_no, "DanglingDelta",
                                   std::to_string(tree.dangling_delta_count()) +
                                       " delta marker(s) in OP replies to the original post of " + tree.id()});
      }
      out.trees.push_back(std::move(tree));
    } catch (const Error& e) {
      if (e.code() == Errc::DeletedAuthor) {
        ++out.deleted_author;
      } else {
        ++out.malformed;
      }
      out.diagnostics.push_back({line_no, std::string(to_string(e.code())), e.what()});
    }
  }
  return out;
}

ReadResult read_corpus(const std::string& path, InputFormat format, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw Error(Errc::UnreadableFile, "read error on " + path);
  return parse_corpus_lines(lines, format, options);
}

std::string awards_csv(std::span<const DiscussionTree> trees) {
  std::ostringstream out;
  out << "tree_id,awarded_node,awarding_node,author\n";
  for (const auto& t : trees) {
    for (const auto& a : t.delta_awards()) {
      out << csv_escape(t.id()) << ',' << csv_escape(a.awarded_to_node) << ','
          << csv_escape(a.awarding_node) << ',' << csv_escape(a.awarded_to_author) << '\n';
    }
  }
  return out.str();
}

}  // namespace cmv::corpus
