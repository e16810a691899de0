#pragma once

// JSON shapes shared by the CLI and the HTTP service.

#include <span>

#include <json.hpp>

#include "shekaste/alignment.hpp"
#include "shekaste/converter.hpp"
#include "shekaste/suggest.hpp"

namespace shekaste {

nlohmann::ordered_json link_to_json(const AlignmentLink& link);
nlohmann::ordered_json links_to_json(std::span<const AlignmentLink> links);
nlohmann::ordered_json trace_to_json(std::span<const ConversionStep> trace);
// Includes links and trace; callers drop what they were not asked for.
nlohmann::ordered_json conversion_to_json(const ConversionResult& result);
nlohmann::ordered_json suggestions_to_json(std::span<const Suggestion> suggestions);

}  // namespace shekaste
