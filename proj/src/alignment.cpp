#include "shekaste/alignment.hpp"

#include <algorithm>

namespace shekaste {

bool links_monotonic(std::span<const AlignmentLink> links) {
  std::vector<AlignmentLink> full;
  for (const auto& l : links) {
    if (!l.informal.empty() && !l.formal.empty()) full.push_back(l);
  }
  std::sort(full.begin(), full.end(), [](const AlignmentLink& a, const AlignmentLink& b) {
    return a.informal.begin < b.informal.begin;
  });
  for (std::size_t i = 1; i < full.size(); ++i) {
    if (full[i].formal.begin <= full[i - 1].formal.begin) return false;
  }
  return true;
}

bool has_empty_span(std::span<const AlignmentLink> links) {
  return std::any_of(links.begin(), links.end(), [](const AlignmentLink& l) {
    return l.informal.empty() || l.formal.empty();
  });
}

bool syntactic_change_of(std::span<const AlignmentLink> links) {
  return !links_monotonic(links) || has_empty_span(links);
}

std::vector<LinkProblem> check_links(std::span<const AlignmentLink> links, std::size_t informal_size,
                                     std::size_t formal_size) {
  std::vector<LinkProblem> out;
  auto bad_span = [](const Span& s, std::size_t size) { return s.begin > s.end || s.end > size; };
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (l.informal.empty() && l.formal.empty()) {
      out.push_back({LinkProblem::Kind::both_empty, i, i, "link " + std::to_string(i) + " has two empty spans"});
    }
    if (bad_span(l.informal, informal_size)) {
      out.push_back({LinkProblem::Kind::out_of_bounds, i, i,
                     "link " + std::to_string(i) + " informal span out of bounds"});
    }
    if (bad_span(l.formal, formal_size)) {
      out.push_back({LinkProblem::Kind::out_of_bounds, i, i,
                     "link " + std::to_string(i) + " formal span out of bounds"});
    }
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    for (std::size_t j = i + 1; j < links.size(); ++j) {
      if (links[i].informal.overlaps(links[j].informal)) {
        out.push_back({LinkProblem::Kind::informal_overlap, i, j,
                       "links " + std::to_string(i) + " and " + std::to_string(j) +
                           " overlap on the informal side"});
      }
      if (links[i].formal.overlaps(links[j].formal)) {
        out.push_back({LinkProblem::Kind::formal_overlap, i, j,
                       "links " + std::to_string(i) + " and " + std::to_string(j) +
                           " overlap on the formal side"});
      }
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> cover(std::span<const AlignmentLink> links, std::size_t size, bool informal) {
  std::vector<std::size_t> counts(size, 0);
  for (const auto& l : links) {
    const Span& s = informal ? l.informal : l.formal;
    for (std::size_t k = s.begin; k < s.end && k < size; ++k) ++counts[k];
  }
  return counts;
}

}  // namespace

std::vector<std::size_t> informal_cover(std::span<const AlignmentLink> links, std::size_t informal_size) {
  return cover(links, informal_size, true);
}

std::vector<std::size_t> formal_cover(std::span<const AlignmentLink> links, std::size_t formal_size) {
  return cover(links, formal_size, false);
}

std::string span_text(std::span<const std::string> tokens, const Span& span) {
  std::string out;
  for (std::size_t k = span.begin; k < span.end && k < tokens.size(); ++k) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[k];
  }
  return out;
}

}  // namespace shekaste
