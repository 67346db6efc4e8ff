#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phhmm/linalg.hpp"

namespace phhmm {

// Ingested annual hydrological records. The hydrological year runs from
// October 1 to September 30 and is identified by its starting calendar
// year. Years must be consecutive; gaps are ingestion errors, never
// silently imputed.
struct InflowSeries {
  std::vector<int> year;  // hydro_year_start, strictly increasing by 1
  Vec inflow;             // hm^3, >= 0
  std::optional<Vec> outflow;
  std::optional<Vec> stored;

  std::size_t size() const { return year.size(); }
};

// Parses a CSV file with header
//   hydro_year_start,inflow_hm3[,outflow_hm3[,stored_hm3]]
// (comma-separated, UTF-8, '.' decimal point). Throws DataError with the
// offending 1-based row number on malformed or inconsistent input.
InflowSeries ingest_csv(const std::string& path);
InflowSeries ingest_csv_text(const std::string& text, const std::string& origin = "<memory>");

}  // namespace phhmm
