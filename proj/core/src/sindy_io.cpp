#include "hhlab/error.hpp"
#include "hhlab/sindy.hpp"
#include "hhlab/text.hpp"

namespace hhlab::sindy {

nlohmann::json model_json(const SparseModel& model) {
  nlohmann::json columns = nlohmann::json::object();
  for (Eigen::Index j = 0; j < 4; ++j) {
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t k = 0; k < model.library.size(); ++k) {
      const double c = model.xi(static_cast<Eigen::Index>(k), j);
      if (c == 0.0) continue;
      terms.push_back({{"exponents", model.library.monomials[k].exponents}, {"coefficient", c}});
    }
    columns[kEquationNames[static_cast<std::size_t>(j)]] = std::move(terms);
  }
  return {{"K", model.library.degree},
          {"threshold", model.threshold},
          {"dt", model.dt},
          {"columns", std::move(columns)}};
}

SparseModel model_from_json(const nlohmann::json& j) {
  SparseModel model;
  try {
    model.library = build_library(j.at("K").get<int>());
    model.threshold = j.at("threshold").get<double>();
    model.dt = j.at("dt").get<double>();
    model.xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.library.size()), 4);
    for (std::size_t c = 0; c < 4; ++c) {
      for (const auto& term : j.at("columns").at(kEquationNames[c])) {
        const auto e = term.at("exponents").get<std::array<int, 4>>();
        const auto idx = model.library.index_of(e);
        if (!idx) throw Error(ErrorKind::InvalidArgument, "model term outside its library");
        model.xi(static_cast<Eigen::Index>(*idx), static_cast<Eigen::Index>(c)) =
            term.at("coefficient").get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed model JSON: ") + e.what());
  }
  return model;
}

std::string model_diff_csv(const ModelDiff& diff) {
  std::string out = "equation,monomial,exact,reconstructed,delta_c,flag\n";
  for (const auto& t : diff.terms) {
    out += kEquationNames[static_cast<std::size_t>(t.equation)];
    out += ',' + t.monomial.name() + ',' + format_double(t.exact) + ',' +
           format_double(t.reconstructed) + ',';
    if (t.delta_c) out += format_double(*t.delta_c);
    out += ',';
    out += to_string(t.flag);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "dt,equation,monomial,delta_c\n";
  for (const auto& r : rows)
    out += format_double(r.dt) + ',' + kEquationNames[static_cast<std::size_t>(r.equation)] + ',' +
           r.monomial.name() + ',' + format_double(r.delta_c) + '\n';
  return out;
}

}  // namespace hhlab::sindy
