#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace sewma::cli {

using Json = nlohmann::ordered_json;

/// A command's output: echoed parameters plus a result table. `text`, when
/// set, replaces the default aligned table in text format.
struct Report {
  Json params;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  std::function<void(std::ostream&)> text;
};

/// x rounded to `digits` significant digits; null when not finite.
Json number(double x, int digits);

/// R's print(x, digits = d) for one value: d significant digits, integer
/// digits never dropped, scientific notation when it is shorter.
std::string r_format(double x, int digits);

void render(const Report& report, const std::string& format, std::ostream& out);

}  // namespace sewma::cli
