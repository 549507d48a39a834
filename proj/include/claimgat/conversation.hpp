#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "claimgat/errors.hpp"

namespace claimgat {

struct Post {
  std::string post_id;
  std::optional<std::string> parent_id;  // absent exactly for the claim
  std::int64_t t = 0;                    // seconds since the claim was posted
  std::string text;
};

// One conversation thread: the claim plus its responsive posts.
// Responses are kept in canonical chronological order (timestamp, then
// post_id for ties), so two files differing only in post order parse to the
// same Event.
struct Event {
  std::string event_id;
  std::string label;
  Post claim;
  std::vector<Post> responses;

  std::size_t post_count() const { return responses.size() + 1; }

  const Post& post(std::size_t i) const { return i == 0 ? claim : responses[i - 1]; }
};

// Known label vocabularies: four-class NR/FR/TR/UR or binary.
inline const std::vector<std::string>& four_class_labels() {
  static const std::vector<std::string> l = {"NR", "FR", "TR", "UR"};
  return l;
}
inline const std::vector<std::string>& binary_labels() {
  static const std::vector<std::string> l = {"non-rumor", "rumor"};
  return l;
}

inline int label_index(const std::string& label, const std::vector<std::string>& label_set) {
  for (std::size_t i = 0; i < label_set.size(); ++i)
    if (label_set[i] == label) return static_cast<int>(i);
  throw ParseError("unknown label '" + label + "'");
}

// Infers the label set from the labels present in a corpus.
inline std::vector<std::string> detect_label_set(const std::vector<Event>& events) {
  bool binary = true, four = true;
  for (const Event& e : events) {
    if (std::find(binary_labels().begin(), binary_labels().end(), e.label) == binary_labels().end())
      binary = false;
    if (std::find(four_class_labels().begin(), four_class_labels().end(), e.label) == four_class_labels().end())
      four = false;
  }
  if (binary) return binary_labels();
  if (four) return four_class_labels();
  throw ParseError("corpus mixes label vocabularies (expected NR|FR|TR|UR or rumor|non-rumor)");
}

namespace detail {

// Validates reply links: unique ids, one root, parents present, acyclic.
// `where` prefixes diagnostics (e.g. "line 17: event e3: ").
inline void validate_event(Event& e, const std::string& where) {
  std::set<std::string> ids;
  std::map<std::string, std::string> parent_of;
  std::vector<Post*> all;
  all.push_back(&e.claim);
  for (Post& p : e.responses) all.push_back(&p);
  int roots = 0;
  for (Post* p : all) {
    if (!ids.insert(p->post_id).second)
      throw ParseError(where + "duplicate post_id '" + p->post_id + "'");
    if (!p->parent_id) ++roots;
  }
  if (roots != 1) throw ParseError(where + std::to_string(roots) + " posts without parent_id (expected exactly 1, the claim)");
  if (e.claim.parent_id) throw ParseError(where + "claim '" + e.claim.post_id + "' has a parent_id");
  if (e.claim.t != 0) throw ParseError(where + "claim timestamp must be 0, got " + std::to_string(e.claim.t));
  for (const Post& p : e.responses) {
    if (p.t < 0) throw ParseError(where + "post '" + p.post_id + "' has negative timestamp");
    if (!ids.count(*p.parent_id))
      throw ParseError(where + "post '" + p.post_id + "' replies to unknown post '" + *p.parent_id + "'");
    parent_of[p.post_id] = *p.parent_id;
  }
  // Walk each post up to the claim; revisiting a node on the way marks a cycle.
  for (const Post& p : e.responses) {
    std::set<std::string> seen;
    std::string cur = p.post_id;
    while (parent_of.count(cur)) {
      if (!seen.insert(cur).second) {
        std::string members;
        for (const std::string& s : seen) members += (members.empty() ? "" : ", ") + s;
        throw ParseError(where + "reply links contain a cycle through {" + members + "}");
      }
      cur = parent_of[cur];
    }
    if (cur != e.claim.post_id)
      throw ParseError(where + "post '" + p.post_id + "' is not connected to the claim");
  }
  std::stable_sort(e.responses.begin(), e.responses.end(), [](const Post& a, const Post& b) {
    return a.t != b.t ? a.t < b.t : a.post_id < b.post_id;
  });
}

inline Event event_from_json(const nlohmann::json& j, const std::string& where) {
  Event e;
  try {
    e.event_id = j.at("event_id").get<std::string>();
    e.label = j.at("label").get<std::string>();
    const auto& posts = j.at("posts");
    if (!posts.is_array() || posts.empty()) throw ParseError(where + "'posts' must be a non-empty array");
    bool claim_set = false;
    for (const auto& pj : posts) {
      Post p;
      p.post_id = pj.at("post_id").get<std::string>();
      if (!pj.at("parent_id").is_null()) p.parent_id = pj.at("parent_id").get<std::string>();
      p.t = pj.at("t").get<std::int64_t>();
      p.text = pj.at("text").get<std::string>();
      if (!p.parent_id) {
        if (claim_set) throw ParseError(where + "more than one post without parent_id");
        e.claim = p;
        claim_set = true;
      } else {
        e.responses.push_back(p);
      }
    }
    if (!claim_set) throw ParseError(where + "no claim post (all posts have parent_id)");
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(where + "malformed record: " + ex.what());
  }
  std::string event_where = where + "event '" + e.event_id + "': ";
  validate_event(e, event_where);
  return e;
}

}  // namespace detail

// Line-delimited event file: one JSON object per line with fields
// event_id, label, posts[{post_id, parent_id|null, t, text}].
inline std::vector<Event> parse_events(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  int line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + "invalid JSON: " + ex.what());
    }
    Event e = detail::event_from_json(j, where);
    if (!seen_ids.insert(e.event_id).second) throw ParseError(where + "duplicate event_id '" + e.event_id + "'");
    events.push_back(std::move(e));
  }
  return events;
}

inline std::vector<Event> parse_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event file: " + path);
  return parse_events(in);
}

inline nlohmann::ordered_json event_to_json(const Event& e) {
  nlohmann::ordered_json j;
  j["event_id"] = e.event_id;
  j["label"] = e.label;
  auto posts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < e.post_count(); ++i) {
    const Post& p = e.post(i);
    nlohmann::ordered_json pj;
    pj["post_id"] = p.post_id;
    if (p.parent_id)
      pj["parent_id"] = *p.parent_id;
    else
      pj["parent_id"] = nullptr;
    pj["t"] = p.t;
    pj["text"] = p.text;
    posts.push_back(pj);
  }
  j["posts"] = posts;
  return j;
}

inline void write_events(std::ostream& out, const std::vector<Event>& events) {
  for (const Event& e : events) out << event_to_json(e).dump() << "\n";
}

inline void write_events(const std::string& path, const std::vector<Event>& events) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  write_events(out, events);
}

// Early-detection truncation. Keeps the claim plus the first `n` responses in
// chronological order; a retained post whose parent was dropped is re-attached
// to its nearest retained ancestor so the graph stays connected.
inline Event truncate_by_count(const Event& e, std::size_t n) {
  Event out;
  out.event_id = e.event_id;
  out.label = e.label;
  out.claim = e.claim;
  const std::size_t keep = std::min(n, e.responses.size());
  std::set<std::string> retained = {e.claim.post_id};
  std::map<std::string, std::string> parent_of;
  for (const Post& p : e.responses) parent_of[p.post_id] = *p.parent_id;
  for (std::size_t i = 0; i < keep; ++i) retained.insert(e.responses[i].post_id);
  for (std::size_t i = 0; i < keep; ++i) {
    Post p = e.responses[i];
    std::string anc = *p.parent_id;
    while (!retained.count(anc)) anc = parent_of.at(anc);
    p.parent_id = anc;
    out.responses.push_back(std::move(p));
  }
  return out;
}

// Keeps responses with timestamp <= elapsed.
inline Event truncate_by_time(const Event& e, std::int64_t elapsed) {
  std::size_t keep = 0;
  while (keep < e.responses.size() && e.responses[keep].t <= elapsed) ++keep;
  return truncate_by_count(e, keep);
}

}  // namespace claimgat
