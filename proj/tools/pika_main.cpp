#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pika/interp.hpp"
#include "pika/modelcheck.hpp"
#include "pika/translate.hpp"
#include "pika/types.hpp"

namespace fs = std::filesystem;
using namespace pika;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool color() {
    const char* c = std::getenv("PIKA_COLOR");
    return c && std::string(c) == "1";
}

void report(const std::string& where, const std::exception& e) {
    std::string tag = color() ? "\033[31merror\033[0m" : "error";
    std::cerr << tag << ": " << (where.empty() ? "" : where + ":") << e.what() << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cmd_compile(const std::vector<std::string>& files, const std::string& out, bool to_stdout, bool goal) {
    int status = 0;
    for (const auto& f : files) {
        std::string text;
        try {
            text = slurp(f);
        } catch (const IoError& e) {
            report("", e);
            return 2;
        }
        try {
            TypedProgram tp = elaborate(parse_program_text(text));
            for (const auto& cd : compile_program(tp)) {
                std::string body = cd.text(goal);
                if (to_stdout) {
                    std::cout << body;
                    continue;
                }
                fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
                std::error_code ec;
                fs::create_directories(dir, ec);
                fs::path target = dir / (cd.file_stem + ".sus");
                std::ofstream o(target, std::ios::binary);
                if (!o) {
                    report("", IoError("cannot write " + target.string()));
                    return 2;
                }
                o << body;
            }
        } catch (const PikaError& e) {
            report(f, e);
            status = 1;
        }
    }
    return status;
}

int cmd_stages(const std::string& file, const std::string& fn) {
    std::string text;
    try {
        text = slurp(file);
    } catch (const IoError& e) {
        report("", e);
        return 2;
    }
    try {
        TypedProgram tp = elaborate(parse_program_text(text));
        std::cout << dump_stages(tp, fn);
    } catch (const PikaError& e) {
        report(file, e);
        return 1;
    }
    return 0;
}

int cmd_run(const std::string& file, const std::string& expr) {
    std::string text;
    try {
        text = slurp(file);
    } catch (const IoError& e) {
        report("", e);
        return 2;
    }
    try {
        auto unit = std::make_shared<SourceUnit>(parse_program_text(text));
        elaborate(*unit);
        GlobalEnv g = build_global_env(*unit);
        ExprPtr e = parse_expr_text(expr);
        std::string why;
        if (!is_core_expr(e, &why)) throw PikaError("UnsupportedConstruct", "", why);
        infer_expr(g, {}, e);
        interp::Outcome o = interp::eval({&g, unit.get()}, e);
        std::cout << o.value.show() << "\n";
        std::cout << "result: " << o.var << "\n";
        std::cout << interp::Model{o.state.store, o.state.heap}.show();
    } catch (const PikaError& e) {
        report(file, e);
        return 1;
    }
    return 0;
}

int cmd_soundness(const std::string& file, int count, std::uint64_t seed, int depth, bool mutate) {
    mc::CoreSignature sig;
    try {
        sig = file.empty() ? mc::default_core_signature() : mc::load_core_signature(slurp(file));
    } catch (const IoError& e) {
        report("", e);
        return 2;
    } catch (const PikaError& e) {
        report(file, e);
        return 1;
    }
    int sat = 0;
    for (int i = 0; i < count; ++i) {
        std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        int budget = 1 + static_cast<int>(s % 12);
        ExprPtr e;
        try {
            e = mc::gen_core_expr(sig, s, budget);
        } catch (const PikaError& err) {
            report("generator", err);
            return 1;
        }
        mc::SoundnessReport r = mc::check_soundness(sig, e, depth, mutate);
        if (!r.result.sat()) {
            std::cout << "counterexample at seed " << s << " (instance " << i + 1 << " of " << count << ")\n"
                      << r.trace;
            return 1;
        }
        ++sat;
    }
    std::cout << sat << "/" << count << " Sat\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pika: Pika to SuSLik specifications, plus the executable core"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string out;
    bool to_stdout = false, goal = false;
    auto* compile = app.add_subcommand("compile", "emit one .sus file per %generate directive");
    compile->add_option("files", files, "input .pika files")->required();
    compile->add_option("--out", out, "output directory");
    compile->add_flag("--stdout", to_stdout, "write to standard output instead");
    compile->add_flag("--emit-goal-spec", goal, "append the synthesis goal");

    std::string file, fn;
    auto* stages = app.add_subcommand("stages", "print the seven translation stages for one function");
    stages->add_option("file", file)->required();
    stages->add_option("fn", fn)->required();

    std::string expr;
    auto* run = app.add_subcommand("run", "evaluate a core expression on the abstract machine");
    run->add_option("file", file)->required();
    run->add_option("expr", expr)->required();

    int count = 1000, depth = 64;
    std::uint64_t seed = 1;
    bool mutate = false;
    auto* sound = app.add_subcommand("soundness", "check generated core expressions against their translation");
    sound->add_option("file", file, "signature (defaults to the built-in one)");
    sound->add_option("--count", count, "number of instances (at least 1)")->check(CLI::Range(1, 1 << 30));
    sound->add_option("--seed", seed);
    sound->add_option("--depth", depth, "unfolding bound")->check(CLI::Range(1, 1 << 20));
    sound->add_flag("--mutate", mutate, "use a deliberately wrong translation of +");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*compile) return cmd_compile(files, out, to_stdout, goal);
    if (*stages) return cmd_stages(file, fn);
    if (*run) return cmd_run(file, expr);
    if (*sound) return cmd_soundness(file, count, seed, depth, mutate);
    return 2;
}
