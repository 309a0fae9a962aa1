#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "epiassim/observation.hpp"

namespace epiassim {

/// Parses "YYYY-MM-DD"; nullopt for anything else or an impossible date.
std::optional<Date> parse_date(std::string_view text);

/// Reads the `date,cases,deaths` CSV. Throws ParseError for malformed rows
/// and DateGapError when consecutive rows skip days.
EpidemicSeries read_series(std::istream& in);
EpidemicSeries load_series(const std::filesystem::path& path);

void write_series(std::ostream& out, const EpidemicSeries& series);
void save_series(const std::filesystem::path& path, const EpidemicSeries& series);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

} // namespace epiassim
