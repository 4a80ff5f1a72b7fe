#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "isoclock/cli.hpp"
#include "isoclock/scenario.hpp"
#include "isoclock/units.hpp"
#include "test_support.hpp"

using namespace isoclock;

namespace {

std::vector<std::string> messages(const std::string& text, std::optional<Subcommand> cmd) {
    try {
        parse_scenario(text, cmd);
    } catch (const ScenarioError& e) {
        std::vector<std::string> out;
        for (const auto& i : e.issues()) out.push_back(i.message);
        return out;
    }
    return {};
}

bool any_contains(const std::vector<std::string>& msgs, std::string_view needle) {
    for (const auto& m : msgs) {
        if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("scenario") {
    TEST_CASE("shipped Sr-87 scenario") {
        const auto doc = load_scenario_file((test_support::data_dir() / "scenarios/sr87.scn").string(), Subcommand::Chain);
        const auto setup = chain_setup(doc, test_support::shipped_registry());
        REQUIRE(setup.scenario.segments.size() == 1);
        CHECK(setup.scenario.segments[0].flux == 1.0e13);
        CHECK(setup.scenario.segments[0].duration_s == 30 * units::kSecondsPerDay);
        CHECK(setup.product == *parse_nuclide_id("Sr-87"));
        CHECK(doc.seed() == 1u);
    }

    TEST_CASE("every shipped scenario parses for its subcommand") {
        const std::pair<const char*, Subcommand> cases[] = {
            {"sr87.scn", Subcommand::Chain},           {"lu175.scn", Subcommand::Chain},
            {"lu176.scn", Subcommand::Chain},          {"tm170.scn", Subcommand::Chain},
            {"sr86_purify.scn", Subcommand::Separation}, {"sr87_ramsey.scn", Subcommand::Ramsey},
            {"sr87_campaign.scn", Subcommand::Campaign}, {"hg199_jumps.scn", Subcommand::Jumps},
        };
        for (const auto& [file, cmd] : cases) {
            CAPTURE(file);
            CHECK_NOTHROW(load_scenario_file((test_support::data_dir() / "scenarios" / file).string(), cmd));
        }
    }

    TEST_CASE("empty file lists the missing sections") {
        const auto msgs = messages("", Subcommand::Chain);
        CHECK(msgs.size() == 3);
        CHECK(any_contains(msgs, "missing section [target]"));
        CHECK(any_contains(msgs, "missing section [reactor]"));
        CHECK(any_contains(msgs, "missing section [output]"));
        CHECK(any_contains(messages("", Subcommand::Jumps), "missing section [ladder]"));
    }

    TEST_CASE("bad values name the key") {
        const auto msgs = messages("[reactor]\nflux=-1\nsegments=5d\n", std::nullopt);
        REQUIRE(msgs.size() == 1);
        CHECK(any_contains(msgs, "flux"));
    }

    TEST_CASE("all errors are reported, not just the first") {
        const std::string text =
            "[target]\n"
            "nuclide=Sr-86\n"
            "mass=20\n"            // unknown key
            "enrichment=1.2\n"     // out of range
            "[reactor]\n"
            "segments=5x@1e13\n"   // bad unit
            "[outptu]\n"           // unknown section
            "product=Sr-87\n"
            "this line is junk\n";
        try {
            parse_scenario(text, Subcommand::Chain);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(e.issues().size() >= 6);
            std::vector<std::size_t> lines;
            for (const auto& i : e.issues()) lines.push_back(i.line);
            CHECK(std::find(lines.begin(), lines.end(), 3u) != lines.end());
            CHECK(std::find(lines.begin(), lines.end(), 4u) != lines.end());
            CHECK(std::find(lines.begin(), lines.end(), 6u) != lines.end());
            CHECK(std::find(lines.begin(), lines.end(), 7u) != lines.end());
            CHECK(std::find(lines.begin(), lines.end(), 9u) != lines.end());
        }
    }

    TEST_CASE("duplicates and cross-key rules") {
        CHECK(any_contains(messages("[reactor]\nflux=1\nflux=2\n", std::nullopt), "duplicate key flux"));
        CHECK(any_contains(messages("[target]\nnuclide=Sr-86\nmass_g=1\n[reactor]\nsegments=5d\n[output]\nproduct=Sr-87\n",
                                    Subcommand::Chain),
                           "has no @flux"));
        CHECK(any_contains(messages("[clock]\nnu0_hz=5e9\n[ramsey]\nfree=1s\npulse=1ms\n", Subcommand::Ramsey),
                           "shots or target_sigma"));
        CHECK(any_contains(messages("nuclide=Sr-86\n", std::nullopt), "before any section"));
    }

    TEST_CASE("segments with and without explicit flux") {
        const auto doc = parse_scenario(
            "[target]\nnuclide=Sr-86\nmass_g=1\n[reactor]\nflux=2e13\nsegments=1d@1e13, 2d ,12h@0\n[output]\nproduct=Sr-87\n",
            Subcommand::Chain);
        const auto setup = chain_setup(doc, test_support::shipped_registry());
        REQUIRE(setup.scenario.segments.size() == 3);
        CHECK(setup.scenario.segments[1].flux == 2e13);
        CHECK(setup.scenario.segments[2].flux == 0.0);
        CHECK(setup.scenario.segments[2].duration_s == 43200.0);
    }
}

TEST_SUITE("cli") {
    TEST_CASE("chain CSV at 5 days converts to about 0.1 mg") {
        auto doc = load_scenario_file((test_support::data_dir() / "scenarios/sr87.scn").string(), Subcommand::Chain);
        const auto out = execute(Subcommand::Chain, doc, test_support::shipped_registry(), 1);
        std::istringstream csv(out.files.at(0).content);
        std::string line;
        std::getline(csv, line);
        CHECK(line == "# seed=1");
        std::getline(csv, line);
        CHECK(line == "time_s,Sr-86,Sr-87m,Sr-87,Sr-88");
        bool seen = false;
        while (std::getline(csv, line)) {
            std::vector<std::string> cells;
            std::stringstream row(line);
            for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
            if (*units::parse_real(cells[0]) != 5 * units::kSecondsPerDay) continue;
            const double atoms = *units::parse_real(cells[3]);
            const double mg = atoms * test_support::shipped_registry().lookup("Sr-87").mass_u() / units::kAvogadro * 1e3;
            CHECK(mg == doctest::Approx(0.1).epsilon(0.5));
            seen = true;
        }
        CHECK(seen);
    }

    TEST_CASE("zero flux gives constant columns") {
        const auto doc = parse_scenario(
            "[target]\nnuclide=Sr-86\nmass_g=20\n[reactor]\nsegments=10d@0\n[output]\nproduct=Sr-87\ngrid_points=5\n",
            Subcommand::Chain);
        const auto out = execute(Subcommand::Chain, doc, test_support::shipped_registry(), 0);
        std::istringstream csv(out.files.at(0).content);
        std::string line, first;
        std::getline(csv, line);
        std::getline(csv, line);
        std::vector<std::string> rows;
        while (std::getline(csv, line)) rows.push_back(line.substr(line.find(',')));
        REQUIRE(rows.size() == 5);
        for (const auto& r : rows) CHECK(r == rows.front());
    }

    TEST_CASE("every subcommand is deterministic in memory") {
        const std::pair<const char*, Subcommand> cases[] = {
            {"sr87.scn", Subcommand::Chain}, {"sr86_purify.scn", Subcommand::Separation},
            {"sr87_ramsey.scn", Subcommand::Ramsey}, {"sr87_campaign.scn", Subcommand::Campaign},
            {"hg199_jumps.scn", Subcommand::Jumps},
        };
        for (const auto& [file, cmd] : cases) {
            CAPTURE(file);
            const auto doc = load_scenario_file((test_support::data_dir() / "scenarios" / file).string(), cmd);
            const auto a = execute(cmd, doc, test_support::shipped_registry(), 42);
            const auto b = execute(cmd, doc, test_support::shipped_registry(), 42);
            REQUIRE(a.files.size() == b.files.size());
            for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].content == b.files[i].content);
            CHECK(a.summary == b.summary);
        }
    }

    TEST_CASE("run writes files and reports errors on the diagnostic stream") {
        const auto dir = std::filesystem::temp_directory_path() / "isoclock_cli_test";
        std::filesystem::remove_all(dir);
        RunOptions opt;
        opt.scenario = test_support::data_dir() / "scenarios/hg199_jumps.scn";
        opt.out = dir / "jumps.csv";
        opt.seed = 9;
        std::ostringstream out, err;
        CHECK(run(Subcommand::Jumps, opt, out, err) == 0);
        CHECK(std::filesystem::exists(dir / "jumps.csv"));
        CHECK(std::filesystem::exists(dir / "jumps_probes.csv"));
        CHECK(read_file(dir / "jumps.csv").rfind("# seed=9\n", 0) == 0);
        CHECK(out.str().find("jumps:") == 0);

        const auto bad = dir / "bad.scn";
        std::ofstream(bad) << "[ladder]\nlifetime_e1=oops\n";
        opt.scenario = bad;
        std::ostringstream out2, err2;
        CHECK(run(Subcommand::Jumps, opt, out2, err2) == 1);
        CHECK(out2.str().empty());
        CHECK(err2.str().find("lifetime_e1") != std::string::npos);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("default output name") {
        RunOptions opt;
        opt.scenario = "some/dir/lu176.scn";
        ScenarioDocument doc;
        CHECK(output_path(Subcommand::Chain, doc, opt) == std::filesystem::path("lu176_chain.csv"));
        opt.out = "x.csv";
        CHECK(output_path(Subcommand::Chain, doc, opt) == std::filesystem::path("x.csv"));
    }
}
