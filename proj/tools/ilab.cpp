#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ilab/experiment.hpp"

namespace {

struct Command {
    std::string kind;
    CLI::App* app = nullptr;
    ilab::Params params;
    std::string out, out_dir;
};

void opt(Command& c, const std::string& key, const std::string& help, bool required = false) {
    auto* o = c.app->add_option("--" + key, c.params[key], help);
    if (required) o->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpolation-space laboratory: weight transforms, K/J-norms and equivalence checks"};
    app.require_subcommand(1);
    std::vector<Command> cmds;
    cmds.reserve(8);
    auto sub = [&](const std::string& kind, const std::string& help) -> Command& {
        cmds.push_back({kind, app.add_subcommand(kind, help), {}, {}, {}});
        auto& c = cmds.back();
        c.app->add_option("--out", c.out, "CSV file (default: stdout)");
        return c;
    };

    auto& tr = sub("transform", "apply a weight transform on a log grid");
    opt(tr, "op", "a-from-b, b-from-a, b-from-a-deriv, glue-tail, glue-head, glue-head-ac, A-from-B, B-from-A", true);
    opt(tr, "weight", "source weight", true);
    opt(tr, "q", "exponent (default 2)");
    opt(tr, "aux", "auxiliary weight of the glue transforms");
    opt(tr, "grid", "lo:hi:step in u = ln x (default -20:20:0.5)");

    auto& id = sub("identity103", "check the product identity of a_from_b on dyadic points");
    opt(id, "weight", "weight b", true);
    opt(id, "q", "exponent in (1, inf) (default 2)");
    opt(id, "m_lo", "lowest log2 x (default -30)");
    opt(id, "m_hi", "highest log2 x (default 30)");
    opt(id, "points", "number of points (default 50)");
    opt(id, "tol", "deviation tolerance (default 1e-6)");

    auto& kf = sub("k-functional", "K(f,t) and J(f,t) on a finite couple");
    opt(kf, "couple", "couple, e.g. wl1:[1,2]:[3,1] or sum(wlinf:[1]:[2])", true);
    opt(kf, "f", "vector, e.g. 1,-1", true);
    opt(kf, "t", "comma-separated t values");
    opt(kf, "grid", "lo:hi:step in ln t (instead of --t)");

    auto& nm = sub("norm", "K- or J-method interpolation norm");
    opt(nm, "couple", "couple", true);
    opt(nm, "f", "vector", true);
    opt(nm, "weight", "weight", true);
    opt(nm, "kind", "K or J (default K)");
    opt(nm, "theta", "theta in [0,1] (default 0)");
    opt(nm, "q", "q in [1,inf] (default 1)");
    opt(nm, "range", "full, head or tail (default full)");

    auto& du = sub("dual", "dual norm of a K- or J-space at a functional");
    opt(du, "couple", "couple", true);
    opt(du, "g", "functional", true);
    opt(du, "weight", "weight", true);
    opt(du, "kind", "K or J (default K)");
    opt(du, "theta", "theta (default 0)");
    opt(du, "q", "q (default 1)");
    opt(du, "range", "full, head or tail (default full)");

    auto& th = sub("theorem", "numerical equivalence check of one statement");
    opt(th, "id", "statement id, e.g. DT0S", true);
    opt(th, "couple", "couple", true);
    opt(th, "weight", "weight", true);
    opt(th, "q", "exponent", true);
    opt(th, "samples", "random samples (default 100)");
    opt(th, "seed", "sample seed (default 7)");
    opt(th, "bound", "PASS bound on the ratio spread (default 10)");
    opt(th, "scale", "sample scale (default 1)");
    opt(th, "aux", "auxiliary weight");
    opt(th, "theta", "theta for the embedding checks (default 0)");
    opt(th, "threads", "worker threads (default: hardware, capped by ILAB_THREADS)");

    auto& su = sub("suite", "run a named suite: golden, properties or theorems");
    su.app->add_option("name,--name", su.params["name"], "suite name")->required();
    opt(su, "seed", "seed (default 7)");
    opt(su, "samples", "samples per theorem report (default 100)");
    su.app->add_option("--out-dir", su.out_dir, "directory for the theorem CSVs (default ilab-theorems)");

    std::string config;
    auto* run = app.add_subcommand("run", "run the jobs of an INI config file");
    run->add_option("--config", config, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run->parsed()) {
        std::ifstream in(config);
        if (!in) {
            std::cerr << "error: cannot open " << config << '\n';
            return 2;
        }
        return ilab::run_config(in, std::cout, std::cerr);
    }
    for (auto& c : cmds) {
        if (!c.app->parsed()) continue;
        try {
            if (c.kind == "suite" && c.out_dir.empty()) c.out_dir = "ilab-theorems";
            return ilab::emit(ilab::run_job(c.kind, c.params), c.out, c.out_dir, std::cout, std::cerr);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return ilab::error_exit_code(e);
        }
    }
    return 2;
}
