#pragma once

// Named model curves, each emitted as one or more CSV tables.

#include "tbswap/csv.hpp"
#include "tbswap/experiments.hpp"

#include <string>
#include <vector>

namespace tbswap {

struct FigureTable {
  std::string file;
  std::string description;
  CsvTable table;
};

struct FigureOutput {
  std::string name;
  std::vector<FigureTable> tables;
  nlohmann::json notes = nlohmann::json::object();
};

struct FigureInfo {
  std::string name;
  std::string description;
};

const std::vector<FigureInfo>& list_figures();
FigureOutput reproduce_figure(const std::string& name, int workers = 1);

// Value of `param` in [lo, hi] (bisection in log space) where the swap
// visibility crosses `level`; throws if the interval does not bracket it.
double swap_crossing(const SourceParams& src, const InterferenceParams& intf, const std::string& param, double lo,
                     double hi, double level = 1.0 / 3.0);

}  // namespace tbswap
