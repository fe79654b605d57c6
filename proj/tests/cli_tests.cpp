// CLI contract checks: exit codes, required-flag naming, and config-file
// support with command-line overrides. argv[1] is the popgraph binary.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;
int g_failures = 0;

void expect(bool cond, const std::string& what) {
    if (!cond) {
        g_failures++;
        std::printf("FAIL %s\n", what.c_str());
    }
}

int run(const std::string& args, const std::string& capture = "") {
    std::string cmd = g_cli + " " + args;
    if (!capture.empty())
        cmd += " > " + capture + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <path-to-popgraph-cli>\n");
        return 64;
    }
    g_cli = argv[1];
    g_dir = fs::temp_directory_path() / "popgraph_cli_tests";
    fs::create_directories(g_dir);

    // Unknown subcommand and missing required flags are usage errors (1).
    expect(run("frobnicate") == 1, "unknown subcommand should exit 1");
    {
        const fs::path cap = g_dir / "missing.txt";
        expect(run("build-graph --schema s.txt --out g.csv", cap.string()) == 1,
               "missing --cohort should exit 1");
        expect(slurp(cap).find("--cohort") != std::string::npos,
               "missing-flag message should name --cohort");
    }

    // Unreadable data files exit 2.
    expect(run("build-graph --cohort nope.csv --schema nope.txt --out g.csv") == 2,
           "missing cohort file should exit 2");

    // Invalid configuration values exit 1.
    expect(run("generate --n 5 --out " + (g_dir / "tiny.csv").string()) == 1,
           "n below the minimum should exit 1");

    // Config file drives a run; command-line flags override its values.
    const fs::path cohort = g_dir / "c.csv";
    const fs::path conf = g_dir / "run.ini";
    {
        std::ofstream os(conf);
        os << "[generate]\n"
           << "n=60\n"
           << "imaging=4\n"
           << "categorical=2\n"
           << "continuous=2\n"
           << "seed=3\n"
           << "out=" << cohort.string() << "\n";
    }
    expect(run("--config " + conf.string() + " generate") == 0, "config-file generate should run");
    {
        std::ifstream is(cohort);
        std::string header, row;
        std::getline(is, header);
        std::size_t rows = 0;
        while (std::getline(is, row))
            if (!row.empty()) rows++;
        expect(rows == 60, "config-file n=60 should produce 60 rows");
        // age + 4 imaging + 4 phenotypes
        expect(std::count(header.begin(), header.end(), ',') == 8,
               "config-file imaging=4 should produce 9 columns");
    }
    // Override n on the command line, keep the rest from the file.
    const fs::path cohort2 = g_dir / "c2.csv";
    expect(run("--config " + conf.string() + " generate --n 80 --out " + cohort2.string()) == 0,
           "config-file with overrides should run");
    {
        std::ifstream is(cohort2);
        std::string line;
        std::getline(is, line);
        std::size_t rows = 0;
        while (std::getline(is, line))
            if (!line.empty()) rows++;
        expect(rows == 80, "command line --n 80 should override the config file");
    }

    // The resolved config echo names the effective seed.
    {
        const fs::path cap = g_dir / "echo.txt";
        expect(run("generate --n 60 --imaging 4 --categorical 2 --continuous 2 --seed 11 --out " +
                       (g_dir / "c3.csv").string(),
                   cap.string()) == 0,
               "generate for echo check should run");
        const std::string out = slurp(cap);
        expect(out.find("seed = 11") != std::string::npos, "run echo should state the seed");
        expect(out.find("n = 60") != std::string::npos, "run echo should state the config");
    }

    if (g_failures == 0) std::printf("cli contract tests passed\n");
    return g_failures;
}
