#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace sewma::cli {

Json number(double x, int digits) {
  if (!std::isfinite(x)) return Json();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", std::max(1, digits), x);
  return std::strtod(buf, nullptr);
}

std::string r_format(double x, int digits) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  digits = std::max(1, digits);
  char sci[64];
  std::snprintf(sci, sizeof sci, "%.*e", digits - 1, x);
  // Drop trailing zeros of the mantissa as R does.
  std::string s(sci);
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  s = mantissa + s.substr(e);

  const int magnitude = x == 0.0 ? 0 : static_cast<int>(std::floor(std::log10(std::fabs(x))));
  int decimals = std::max(0, digits - 1 - magnitude);
  char fixed[512];
  std::snprintf(fixed, sizeof fixed, "%.*f", decimals, x);
  std::string f(fixed);
  if (f.find('.') != std::string::npos) {
    while (f.back() == '0') f.pop_back();
    if (f.back() == '.') f.pop_back();
  }
  return f.size() <= s.size() ? f : s;
}

namespace {

std::string cell(const Json& value) {
  if (value.is_null()) return "NA";
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value.get<double>());
    // Shortest representation that survives the round trip.
    for (int p = 1; p <= 17; ++p) {
      char trial[64];
      std::snprintf(trial, sizeof trial, "%.*g", p, value.get<double>());
      if (std::strtod(trial, nullptr) == value.get<double>()) return trial;
    }
    return buf;
  }
  return value.dump();
}

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_params_comment(const Json& params, std::ostream& out) {
  for (const auto& [key, value] : params.items()) {
    if (value.is_object()) {
      for (const auto& [inner, v] : value.items()) out << "# " << key << '.' << inner << '=' << cell(v) << '\n';
    } else if (value.is_array()) {
      out << "# " << key << '=';
      for (std::size_t i = 0; i < value.size(); ++i) out << (i ? "," : "") << cell(value[i]);
      out << '\n';
    } else {
      out << "# " << key << '=' << cell(value) << '\n';
    }
  }
}

}  // namespace

void render(const Report& report, const std::string& format, std::ostream& out) {
  if (format == "json") {
    Json doc;
    doc["params"] = report.params;
    Json results = Json::array();
    for (const auto& row : report.rows) {
      Json obj;
      for (std::size_t c = 0; c < report.columns.size(); ++c) obj[report.columns[c]] = row[c];
      results.push_back(std::move(obj));
    }
    doc["results"] = std::move(results);
    out << doc.dump(2) << '\n';
    return;
  }
  if (format == "csv" || format == "tsv") {
    const bool csv = format == "csv";
    const char sep = csv ? ',' : '\t';
    write_params_comment(report.params, out);
    for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c ? std::string(1, sep) : "") << report.columns[c];
    out << '\n';
    for (const auto& row : report.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const std::string text = cell(row[c]);
        out << (c ? std::string(1, sep) : "") << (csv ? csv_quote(text) : text);
      }
      out << '\n';
    }
    return;
  }
  if (report.text) {
    report.text(out);
    return;
  }
  std::vector<std::size_t> width(report.columns.size());
  for (std::size_t c = 0; c < report.columns.size(); ++c) width[c] = report.columns[c].size();
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], cell(row[c]).size());
  }
  const auto line = [&](const auto& get) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string text = get(c);
      if (c) out << ' ';
      out << std::string(width[c] - text.size(), ' ') << text;
    }
    out << '\n';
  };
  line([&](std::size_t c) { return report.columns[c]; });
  for (const auto& row : report.rows) line([&](std::size_t c) { return cell(row[c]); });
}

}  // namespace sewma::cli
