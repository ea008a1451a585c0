#include "htl/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace htl::io {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

json reg_to_json(const reg::RegularizerSpec& spec) {
  json j{{"name", reg::reg_name(spec)}, {"scale", spec.scale}};
  if (spec.name == reg::RegName::elastic) j["scale1"] = spec.scale1;
  if (spec.center.size() > 0) j["center"] = vector_to_json(spec.center);
  return j;
}

reg::RegularizerSpec reg_from_json(const json& j) {
  return reg::make_reg(j.at("name").get<std::string>(), j.at("scale").get<double>(),
                       j.value("scale1", 0.0),
                       j.contains("center") ? vector_from_json(j["center"])
                                            : Eigen::VectorXd{});
}

json source_to_json(const sources::Source& src) {
  if (src.kind == sources::Source::Kind::linear)
    return json{{"kind", "linear"}, {"w", vector_to_json(src.w)}};
  return json{{"kind", "table"},
              {"dataset_id", src.dataset_id},
              {"predictions", vector_to_json(src.predictions)}};
}

sources::Source source_from_json(const json& j) {
  sources::Source src;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    src.kind = sources::Source::Kind::linear;
    src.w = vector_from_json(j.at("w"));
  } else if (kind == "table") {
    src.kind = sources::Source::Kind::table;
    src.dataset_id = j.value("dataset_id", "");
    src.predictions = vector_from_json(j.at("predictions"));
  } else {
    throw std::runtime_error("unknown source kind: " + kind);
  }
  return src;
}

}  // namespace

void save_model(const solver::TargetModel& model, const std::string& path) {
  json j{{"version", 1},
         {"loss", losses::loss_name(model.loss)},
         {"reg", reg_to_json(model.regularizer)},
         {"lambda", model.lambda},
         {"w", vector_to_json(model.w)},
         {"beta", vector_to_json(model.beta)},
         {"meta", json::object()}};
  write_json(j, path);
}

solver::TargetModel load_model(const std::string& path) {
  const json j = load_json(path);
  solver::TargetModel model;
  model.loss = losses::make_loss(j.at("loss").get<std::string>());
  model.regularizer = reg_from_json(j.at("reg"));
  model.lambda = j.at("lambda").get<double>();
  model.w = vector_from_json(j.at("w"));
  model.beta = vector_from_json(j.at("beta"));
  return model;
}

void save_sources(const sources::SourceEnsemble& ensemble, const std::string& path) {
  json arr = json::array();
  for (const auto& src : ensemble.sources) arr.push_back(source_to_json(src));
  write_json(json{{"output_bound", ensemble.output_bound}, {"sources", arr}}, path);
}

sources::SourceEnsemble load_sources(const std::string& path) {
  const json j = load_json(path);
  sources::SourceEnsemble ensemble;
  if (j.is_array()) {
    for (const auto& item : j) ensemble.sources.push_back(source_from_json(item));
  } else if (j.contains("sources")) {
    ensemble.output_bound = j.value("output_bound", 1.0);
    for (const auto& item : j["sources"])
      ensemble.sources.push_back(source_from_json(item));
  } else {
    ensemble.sources.push_back(source_from_json(j));
  }
  return ensemble;
}

sources::SourceEnsemble load_source_files(const std::vector<std::string>& paths) {
  sources::SourceEnsemble merged;
  double bound = 0.0;
  for (const auto& path : paths) {
    auto part = load_sources(path);
    bound = std::max(bound, part.output_bound);
    for (auto& src : part.sources) merged.sources.push_back(std::move(src));
  }
  // files without a declared bound default to 1; linear sources certify
  // ||w|| as a bound on their own outputs over the unit ball
  for (const auto& src : merged.sources)
    if (src.kind == sources::Source::Kind::linear)
      bound = std::max(bound, src.w.norm());
  merged.output_bound = bound > 0 ? bound : 1.0;
  return merged;
}

}  // namespace htl::io
