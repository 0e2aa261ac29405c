#include "mra/serialize.hpp"

#include <fstream>

namespace mra::io {

json to_json(const op::SessionConfig& c) {
    return json{{"Ka", c.Ka}, {"k", c.k}, {"N", c.N}, {"eps_target", c.eps_target}};
}

op::SessionConfig config_from_json(const json& j) {
    op::SessionConfig c;
    c.Ka = j.at("Ka").get<int>();
    c.k = j.at("k").get<int>();
    c.N = j.at("N").get<long>();
    c.eps_target = j.at("eps_target").get<double>();
    c.validate();
    return c;
}

json to_json(const op::SchemeParams& p) {
    return json{{"k_p", p.k_p},   {"n_p", p.n_p},   {"d", p.d},
                {"T", p.T},       {"n_c1", p.n_c1}, {"n_c2", p.n_c2},
                {"V", p.V},       {"N_f", p.N_f},   {"P1", p.P1},
                {"P2", p.P2},     {"P_f", p.P_f},   {"icr", p.icr},
                {"omt", p.omt},   {"code_seed", p.code_seed}};
}

op::SchemeParams params_from_json(const json& j) {
    op::SchemeParams p;
    p.k_p = j.at("k_p").get<int>();
    p.n_p = j.at("n_p").get<int>();
    p.d = j.at("d").get<int>();
    p.T = j.value("T", (p.d - 1) / 2);
    p.n_c1 = j.at("n_c1").get<int>();
    p.n_c2 = j.at("n_c2").get<int>();
    p.V = j.at("V").get<int>();
    p.N_f = j.at("N_f").get<int>();
    p.P1 = j.at("P1").get<double>();
    p.P2 = j.at("P2").get<double>();
    p.P_f = j.at("P_f").get<double>();
    p.icr = j.value("icr", true);
    p.omt = j.value("omt", true);
    p.code_seed = j.value("code_seed", op::SchemeParams{}.code_seed);
    p.validate();
    return p;
}

json to_json(const err::ErrorBudget& b) {
    return json{{"eps1", b.eps1},     {"eps2", b.eps2},   {"eps3", b.eps3},
                {"eps4", b.eps4},     {"eps_f", b.eps_f}, {"eps_f2", b.eps_f2},
                {"total", b.total},
                {"excluded", "count-misselection and erasure terms are "
                             "measured by simulation only"}};
}

json to_json(const opt::DesignResult& r, const opt::DesignProblem& problem) {
    return json{{"config", to_json(problem.config)},
                {"flags", json{{"icr", problem.icr}, {"omt", problem.omt}}},
                {"params", to_json(r.params)},
                {"P", r.P},
                {"relaxed_P", r.relaxed_P},
                {"eb_n0_db", r.eb_n0_db},
                {"budget", to_json(r.budget)}};
}

json to_json(const sim::SessionReport& r) {
    return json{{"trials", r.trials},
                {"Ka", r.Ka},
                {"user_errors", r.user_errors},
                {"pupe", r.pupe},
                {"ci95", r.ci95},
                {"tallies",
                 json{{"subblock_loss", r.tallies.subblock_loss},
                      {"collision", r.tallies.collision},
                      {"erasure", r.tallies.erasure},
                      {"misselect", r.tallies.misselect},
                      {"feedback", r.tallies.feedback},
                      {"data", r.tallies.data}}},
                {"eps_g_hat", r.eps_g_hat},
                {"eps_e_hat", r.eps_e_hat},
                {"eps_f_used", r.eps_f_used},
                {"eps4_used", r.eps4_used}};
}

json scheme_to_json(const op::Scheme& scheme) {
    return json{{"params", to_json(scheme.params())},
                {"aux_parity_hex", scheme.aux().parity_check.to_hex()},
                {"inner_generator_hex", scheme.inner().generator().to_hex()}};
}

op::Scheme scheme_from_json(const json& j) {
    op::SchemeParams p = params_from_json(j.at("params"));
    if (j.contains("aux_parity_hex") && j.contains("inner_generator_hex")) {
        codes::AuxCode aux(
            BitMatrix::from_hex(p.m_p(), p.n_p,
                                j.at("aux_parity_hex").get<std::string>()),
            p.d);
        codes::InnerCode inner(BitMatrix::from_hex(
            p.m_p(), p.n_c1, j.at("inner_generator_hex").get<std::string>()));
        return op::Scheme(p, std::move(aux), std::move(inner));
    }
    return op::Scheme::build(p);
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    json j;
    f >> j;
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

}  // namespace mra::io
