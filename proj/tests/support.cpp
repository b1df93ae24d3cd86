#include "support.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace support {

std::string test_dir() { return PIKA_TEST_DIR; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::vector<std::string>& golden_names() {
    static const std::vector<std::string> names = {
        "filterLt9", "fold",   "maximum", "cons",  "car",        "singleton", "map",
        "snoc",      "reverse", "append", "zip",   "zipWith",    "scanr",     "selfAppend",
        "take",      "replicate", "foldMap", "mapSum", "leftList", "sum"};
    return names;
}

std::string normalise(std::string s) {
    auto swap = [&](const std::string& from, const std::string& to) {
        for (size_t k = s.find(from); k != std::string::npos; k = s.find(from, k + to.size()))
            s.replace(k, from.size(), to);
    };
    swap("S11", "Sll");
    swap("S1l", "Sll");
    swap("leftList_rw_", "leftList__rw_");
    return s;
}

pika::TypedProgram load_golden(const std::string& name) {
    std::string dir = test_dir() + "/corpus/";
    std::string text = read_file(dir + "prelude.pika") + "\n" + read_file(dir + "golden/" + name + ".pika");
    return pika::elaborate(pika::parse_program_text(normalise(text)));
}

pika::ssl::PredicateDef golden_reference(const std::string& name) {
    return pika::ssl::parse_predicate(normalise(read_file(test_dir() + "/corpus/golden/" + name + ".sus")));
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

CliRun run_cli(const std::string& args) {
    namespace fs = std::filesystem;
    static int counter = 0;
    fs::path err = fs::temp_directory_path() / ("pika_cli_err_" + std::to_string(::getpid()) + "_" +
                                                std::to_string(counter++));
    std::string cmd = shell_quote(PIKA_CLI) + " " + args + " 2>" + shell_quote(err.string());
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = ::pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    try {
        r.err = read_file(err.string());
    } catch (...) {
    }
    std::error_code ec;
    fs::remove(err, ec);
    return r;
}

}  // namespace support
