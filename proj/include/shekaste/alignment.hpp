#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shekaste {

// Half-open token index range.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const { return begin >= end; }
  std::size_t size() const { return empty() ? 0 : end - begin; }
  bool overlaps(const Span& o) const { return !empty() && !o.empty() && begin < o.end && o.begin < end; }
  auto operator<=>(const Span&) const = default;
};

struct AlignmentLink {
  Span informal;
  Span formal;

  auto operator<=>(const AlignmentLink&) const = default;
};

// True when ordering the links with two non-empty spans by informal start
// also orders them by formal start.
bool links_monotonic(std::span<const AlignmentLink> links);
bool has_empty_span(std::span<const AlignmentLink> links);
// Non-monotonic or containing an insertion/deletion.
bool syntactic_change_of(std::span<const AlignmentLink> links);

struct LinkProblem {
  enum class Kind { both_empty, out_of_bounds, informal_overlap, formal_overlap };
  Kind kind;
  std::size_t first = 0;   // link index
  std::size_t second = 0;  // other link index for overlaps
  std::string message;
};

// Structural problems only (bounds, overlap, both spans empty).
std::vector<LinkProblem> check_links(std::span<const AlignmentLink> links, std::size_t informal_size,
                                     std::size_t formal_size);

// Per-index cover counts on each side.
std::vector<std::size_t> informal_cover(std::span<const AlignmentLink> links, std::size_t informal_size);
std::vector<std::size_t> formal_cover(std::span<const AlignmentLink> links, std::size_t formal_size);

std::string span_text(std::span<const std::string> tokens, const Span& span);

}  // namespace shekaste
