#include <doctest.h>

#include <filesystem>

#include "support.hpp"

using support::run_cli;
using support::shell_quote;

namespace {

std::string path(const std::string& rel) { return shell_quote(support::test_dir() + "/" + rel); }

}  // namespace

TEST_CASE("compile") {
    namespace fs = std::filesystem;
    fs::path out = fs::temp_directory_path() / "pika_cli_compile";
    fs::remove_all(out);
    auto r = run_cli("compile " + path("bench/cons.pika") + " --out " + shell_quote(out.string()));
    CHECK(r.code == 0);
    int files = 0;
    for (const auto& f : fs::directory_iterator(out)) {
        CHECK(f.path().extension() == ".sus");
        ++files;
    }
    CHECK(files >= 1);
    fs::remove_all(out);

    auto s = run_cli("compile --stdout " + path("bench/cons.pika"));
    CHECK(s.code == 0);
    CHECK(s.out.find("predicate ") != std::string::npos);
    CHECK(s.out.find("void ") == std::string::npos);

    auto g = run_cli("compile --stdout --emit-goal-spec " + path("bench/cons.pika"));
    CHECK(g.out.find("void ") != std::string::npos);

    auto bad = run_cli("compile --stdout " + path("negative/unbound_body_var.pika"));
    CHECK(bad.code == 1);
    CHECK(bad.err.find("UnboundVariable") != std::string::npos);

    CHECK(run_cli("compile --stdout /nonexistent/file.pika").code == 2);
    CHECK(run_cli("compile").code == 2);
}

TEST_CASE("stages") {
    auto r = run_cli("stages " + path("bench/even.pika") + " even");
    CHECK(r.code == 0);
    CHECK(r.out.find("7. ") != std::string::npos);
    CHECK(run_cli("stages " + path("bench/even.pika") + " odd").code == 1);
}

TEST_CASE("run") {
    auto r = run_cli("run " + path("corpus/prelude.pika") + " " + shell_quote("3 + 4"));
    CHECK(r.code == 0);
    CHECK(r.out.find("7\n") == 0);
    CHECK(r.out.find("heap: (empty)") != std::string::npos);

    auto l = run_cli("run " + path("corpus/prelude.pika") + " " + shell_quote("lower Sll (Cons 7 (lower Sll Nil))"));
    CHECK(l.code == 0);
    CHECK(l.out.find(":-> 7") != std::string::npos);

    CHECK(run_cli("run " + path("corpus/prelude.pika") + " " + shell_quote("if true then 1 else 2")).code == 1);
}

TEST_CASE("soundness") {
    auto r = run_cli("soundness --count 20 --seed 3");
    CHECK(r.code == 0);
    CHECK(run_cli("soundness --count 0").code == 2);
    auto m = run_cli("soundness --count 200 --mutate");
    CHECK(m.code == 1);
    CHECK(m.out.find("verdict: Unsat") != std::string::npos);
}

TEST_CASE("help and unknown commands") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("frobnicate").code == 2);
}
