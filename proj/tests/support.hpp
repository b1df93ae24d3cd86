#pragma once

#include <string>
#include <vector>

#include "pika/ssl.hpp"
#include "pika/translate.hpp"
#include "pika/types.hpp"

namespace support {

std::string test_dir();
std::string read_file(const std::string& path);

// The twenty example programs with a reference predicate.
const std::vector<std::string>& golden_names();

// The reference outputs spell Sll as S11 / S1l in places and once drop an
// underscore from a mangled name; fold both onto the canonical spelling.
std::string normalise(std::string s);

// prelude + example, parsed and elaborated.
pika::TypedProgram load_golden(const std::string& name);
pika::ssl::PredicateDef golden_reference(const std::string& name);

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};
// Runs the built pika binary with `args` (already shell-quoted).
CliRun run_cli(const std::string& args);

std::string shell_quote(const std::string& s);

}  // namespace support
