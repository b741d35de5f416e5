// Acceptance run: one PASS/FAIL line per check group, failing checks listed
// underneath. Tolerances live with the checks in tools/verify/checks.cpp.
//
//   hhe_acceptance [--full]

#include <cstring>
#include <iostream>
#include <map>

#include "hhepi/parallel.hpp"
#include "verify/checks.hpp"

int main(int argc, char** argv)
{
    using namespace hhepi::verify;

    VerifyOptions options;
    options.threads = hhepi::resolve_threads(0);
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--full") == 0) {
            options.full = true;
        } else {
            std::cerr << "usage: hhe_acceptance [--full]\n";
            return 2;
        }
    }

    const auto results = run_checks(options);
    std::map<std::string, std::vector<const CheckResult*>> by_group;
    for (const auto& r : results) {
        by_group[r.group].push_back(&r);
    }

    bool ok = true;
    for (const auto& g : groups()) {
        const auto it = by_group.find(g.name);
        if (it == by_group.end()) {
            std::cout << "SKIP  " << g.name << "  " << g.title << '\n';
            continue;
        }
        bool pass = true;
        for (const auto* r : it->second) {
            pass = pass && r->pass;
        }
        ok = ok && pass;
        std::cout << (pass ? "PASS  " : "FAIL  ") << g.name << "  " << g.title << '\n';
        for (const auto* r : it->second) {
            if (!r->pass) {
                std::cout << "        " << r->name << ": got " << r->got << ", expected " << r->expected
                          << " (tolerance " << r->tolerance << ")";
                if (!r->note.empty()) {
                    std::cout << "  " << r->note;
                }
                std::cout << '\n';
            }
        }
    }
    return ok ? 0 : 1;
}
