#ifndef HTL_MODEL_IO_HPP
#define HTL_MODEL_IO_HPP

#include <string>

#include "htl/solver.hpp"
#include "htl/sources.hpp"

namespace htl::io {

// Model file: {version, loss, reg: {name, scale, scale1, center}, lambda,
// w: [...], beta: [...], meta: {...}}
void save_model(const solver::TargetModel& model, const std::string& path);
solver::TargetModel load_model(const std::string& path);

// Source files hold either a single object {kind: "linear", w: [...]} /
// {kind: "table", dataset_id, predictions: [...]} or an ensemble
// {output_bound, sources: [...]}.
void save_sources(const sources::SourceEnsemble& ensemble, const std::string& path);
sources::SourceEnsemble load_sources(const std::string& path);
// Merge several source files into one ensemble.
sources::SourceEnsemble load_source_files(const std::vector<std::string>& paths);

}  // namespace htl::io

#endif  // HTL_MODEL_IO_HPP
