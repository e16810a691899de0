#include "shekaste/serialize.hpp"

namespace shekaste {

using nlohmann::ordered_json;

ordered_json link_to_json(const AlignmentLink& l) {
  ordered_json out;
  out["informal"] = {l.informal.begin, l.informal.end};
  out["formal"] = {l.formal.begin, l.formal.end};
  return out;
}

ordered_json links_to_json(std::span<const AlignmentLink> links) {
  ordered_json out = ordered_json::array();
  for (const auto& l : links) out.push_back(link_to_json(l));
  return out;
}

ordered_json trace_to_json(std::span<const ConversionStep> trace) {
  ordered_json out = ordered_json::array();
  for (const auto& s : trace) {
    ordered_json row;
    row["stage"] = s.stage;
    row["source"] = s.source;
    row["informal_index"] = s.informal_index;
    row["before"] = s.before;
    row["after"] = s.after;
    out.push_back(std::move(row));
  }
  return out;
}

ordered_json conversion_to_json(const ConversionResult& r) {
  ordered_json out;
  out["formal_text"] = r.formal_text;
  out["informal_tokens"] = r.informal_tokens;
  out["formal_tokens"] = r.formal_tokens;
  out["links"] = links_to_json(r.links);
  out["syntactic_change"] = r.syntactic_change;
  ordered_json alts = ordered_json::array();
  for (const auto& a : r.alternatives) {
    alts.push_back({{"informal_index", a.informal_index}, {"expansions", a.expansions}});
  }
  out["alternatives"] = std::move(alts);
  ordered_json flags = ordered_json::array();
  for (const auto& f : r.emphasis_flags) flags.push_back({{"offset", f.offset}, {"run_length", f.run_length}});
  out["emphasis_flags"] = std::move(flags);
  out["trace"] = trace_to_json(r.trace);
  return out;
}

ordered_json suggestions_to_json(std::span<const Suggestion> suggestions) {
  ordered_json out = ordered_json::array();
  for (const auto& s : suggestions) {
    ordered_json row = link_to_json(s.link);
    row["score"] = s.score;
    row["context_overlap"] = s.tie_break;
    row["provenance"] = std::string(to_string(s.provenance));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace shekaste
