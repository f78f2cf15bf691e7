// leanstub: an offline stand-in for the Lean 3 CLI. Reads a .lean file, runs
// the lexical well-formedness checks (balanced brackets, matched begin/end,
// proof-hole warnings) and reports them in Lean's path:line:col format,
// exiting 1 when errors were found. It accepts anything lexically sane, so it
// is a test double for harness plumbing, not a proof checker; point the
// harness at a real `lean` binary for actual validation.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "proofgen/lean_text.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: leanstub <file.lean>\n");
        return 2;
    }
    const std::string path = argv[1];
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "leanstub: cannot open %s\n", path.c_str());
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string source = buf.str();

    bool errors = false;
    for (const proofgen::lean::LexIssue& issue : proofgen::lean::lexical_check(source)) {
        std::printf("%s:%d:%d: %s: %s\n", path.c_str(), issue.line, issue.col,
                    issue.warning ? "warning" : "error", issue.message.c_str());
        if (!issue.warning) errors = true;
    }
    return errors ? 1 : 0;
}
