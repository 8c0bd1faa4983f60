#include "saaf/serialize.hpp"

#include <fstream>
#include <vector>

#include "saaf/errors.hpp"

namespace saaf {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("ragged matrix in network file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c));
  }
  return m;
}

}  // namespace

nlohmann::json saaf_to_json(const Saaf& f) {
  const auto breaks = f.grid().breaks();
  return {
      {"c", f.degree()},
      {"breaks", std::vector<double>(breaks.begin(), breaks.end())},
      {"w", std::vector<double>(f.w().begin(), f.w().end())},
      {"v", std::vector<double>(f.v().begin(), f.v().end())},
  };
}

Saaf saaf_from_json(const nlohmann::json& j) {
  try {
    return Saaf(j.at("c").get<int>(), BreakGrid(j.at("breaks").get<std::vector<double>>()),
                j.at("w").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed SAAF JSON: ") + e.what());
  }
}

nlohmann::json activation_to_json(const Activation& a) {
  nlohmann::json j;
  j["kind"] = activation_kind_tag(a);
  if (const auto* f = std::get_if<LReLU>(&a)) {
    j["slope"] = f->slope;
  } else if (const auto* f = std::get_if<PReLU>(&a)) {
    j["slope"] = f->slope;
  } else if (const auto* f = std::get_if<APLU>(&a)) {
    j["slopes"] = f->slopes;
    j["breaks"] = f->breaks;
  } else if (const auto* f = std::get_if<Saaf>(&a)) {
    j.update(saaf_to_json(*f));
  }
  return j;
}

Activation activation_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "relu") return ReLU{};
    if (kind == "lrelu") return LReLU{j.at("slope").get<double>()};
    if (kind == "prelu") return PReLU{j.at("slope").get<double>()};
    if (kind == "aplu") {
      APLU f;
      f.slopes = j.at("slopes").get<std::vector<double>>();
      f.breaks = j.at("breaks").get<std::vector<double>>();
      if (f.slopes.empty() || f.slopes.size() != f.breaks.size()) {
        throw DataError("APLU JSON needs matching non-empty slopes/breaks");
      }
      return f;
    }
    if (kind == "saaf") return saaf_from_json(j);
    throw DataError("unknown activation kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed activation JSON: ") + e.what());
  }
}

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["format"] = "saaf-net/1";
  j["input_dim"] = net.input_dim;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : net.layers) {
    nlohmann::json lj;
    lj["W"] = matrix_to_json(layer.W);
    lj["b"] = to_vector(layer.b);
    lj["sharing"] = layer.sharing == Sharing::kLayerShared ? "layer-shared" : "per-neuron";
    if (layer.bn) {
      lj["batchnorm"] = {
          {"gamma", to_vector(layer.bn->gamma)},
          {"beta", to_vector(layer.bn->beta)},
          {"running_mean", to_vector(layer.bn->running_mean)},
          {"running_var", to_vector(layer.bn->running_var)},
          {"eps", layer.bn->eps},
          {"momentum", layer.bn->momentum},
      };
    }
    nlohmann::json acts = nlohmann::json::array();
    for (const Activation& a : layer.acts) acts.push_back(activation_to_json(a));
    lj["activations"] = std::move(acts);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  j["output"] = {{"h", to_vector(net.h)}, {"bias", net.out_bias}};
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "saaf-net/1") {
      throw DataError("unsupported network format tag");
    }
    Network net;
    net.input_dim = j.at("input_dim").get<int>();
    for (const auto& lj : j.at("layers")) {
      Layer layer;
      layer.W = matrix_from_json(lj.at("W"));
      layer.b = from_vector(lj.at("b").get<std::vector<double>>());
      layer.sharing = lj.at("sharing").get<std::string>() == "layer-shared"
                          ? Sharing::kLayerShared
                          : Sharing::kPerNeuron;
      if (lj.contains("batchnorm")) {
        const auto& bj = lj.at("batchnorm");
        BatchNorm bn;
        bn.gamma = from_vector(bj.at("gamma").get<std::vector<double>>());
        bn.beta = from_vector(bj.at("beta").get<std::vector<double>>());
        bn.running_mean = from_vector(bj.at("running_mean").get<std::vector<double>>());
        bn.running_var = from_vector(bj.at("running_var").get<std::vector<double>>());
        bn.eps = bj.at("eps").get<double>();
        bn.momentum = bj.at("momentum").get<double>();
        layer.bn = std::move(bn);
      }
      for (const auto& aj : lj.at("activations")) {
        layer.acts.push_back(activation_from_json(aj));
      }
      const std::size_t expected = layer.sharing == Sharing::kLayerShared
                                       ? 1
                                       : static_cast<std::size_t>(layer.W.rows());
      if (layer.acts.size() != expected) {
        throw DataError("activation count does not match layer width");
      }
      net.layers.push_back(std::move(layer));
    }
    const auto& oj = j.at("output");
    net.h = from_vector(oj.at("h").get<std::vector<double>>());
    net.out_bias = oj.at("bias").get<double>();
    if (net.layers.empty()) throw DataError("network file has no layers");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network JSON: ") + e.what());
  }
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write network file: " + path);
  out << network_to_json(net).dump(2) << "\n";
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open network file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse network file " + path + ": " + e.what());
  }
  return network_from_json(j);
}

}  // namespace saaf
