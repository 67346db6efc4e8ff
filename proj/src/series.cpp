#include "phhmm/series.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phhmm/common.hpp"

namespace phhmm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  for (auto& f : fields) {
    const auto begin = f.find_first_not_of(" \t");
    const auto end = f.find_last_not_of(" \t");
    f = begin == std::string::npos ? std::string() : f.substr(begin, end - begin + 1);
  }
  return fields;
}

double parse_number(const std::string& text, const std::string& origin, std::size_t row,
                    const std::string& column) {
  if (text.empty())
    throw DataError(origin + ": row " + std::to_string(row) + ": empty " + column + " field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw DataError(origin + ": row " + std::to_string(row) + ": cannot parse " + column + " '" +
                    text + "'");
  return v;
}

}  // namespace

InflowSeries ingest_csv_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;

  if (!std::getline(in, line)) throw DataError(origin + ": empty file");
  ++row;
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "hydro_year_start" || header[1] != "inflow_hm3")
    throw DataError(origin + ": header must start with 'hydro_year_start,inflow_hm3'");
  bool has_outflow = false, has_stored = false;
  if (header.size() >= 3) {
    if (header[2] != "outflow_hm3")
      throw DataError(origin + ": third column must be 'outflow_hm3', got '" + header[2] + "'");
    has_outflow = true;
  }
  if (header.size() >= 4) {
    if (header[3] != "stored_hm3")
      throw DataError(origin + ": fourth column must be 'stored_hm3', got '" + header[3] + "'");
    has_stored = true;
  }
  if (header.size() > 4) throw DataError(origin + ": too many columns");

  InflowSeries s;
  if (has_outflow) s.outflow.emplace();
  if (has_stored) s.stored.emplace();

  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(origin + ": row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));

    const double year_value = parse_number(fields[0], origin, row, "hydro_year_start");
    const int year = static_cast<int>(year_value);
    if (static_cast<double>(year) != year_value)
      throw DataError(origin + ": row " + std::to_string(row) + ": year must be an integer");
    if (!s.year.empty()) {
      if (year == s.year.back())
        throw DataError(origin + ": row " + std::to_string(row) + ": duplicated year " +
                        std::to_string(year));
      if (year != s.year.back() + 1)
        throw DataError(origin + ": row " + std::to_string(row) + ": year " +
                        std::to_string(year) + " does not follow " + std::to_string(s.year.back()) +
                        " (gaps are not imputed)");
    }
    s.year.push_back(year);

    const double inflow = parse_number(fields[1], origin, row, "inflow_hm3");
    if (inflow < 0.0)
      throw DataError(origin + ": row " + std::to_string(row) + ": negative inflow");
    s.inflow.push_back(inflow);

    if (has_outflow) {
      const double outflow = parse_number(fields[2], origin, row, "outflow_hm3");
      if (outflow < 0.0)
        throw DataError(origin + ": row " + std::to_string(row) + ": negative outflow");
      s.outflow->push_back(outflow);
    }
    if (has_stored) {
      const double stored = parse_number(fields[3], origin, row, "stored_hm3");
      if (stored < 0.0)
        throw DataError(origin + ": row " + std::to_string(row) + ": negative stored volume");
      s.stored->push_back(stored);
    }
  }
  if (s.year.empty()) throw DataError(origin + ": no data rows (header only)");
  return s;
}

InflowSeries ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ingest_csv_text(buffer.str(), path);
}

}  // namespace phhmm
