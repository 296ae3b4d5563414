// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "rulegen/analytics.hpp"
#include "rulegen/yara.hpp"

using namespace rulegen;
using analytics::Metrics;
using analytics::TaxonomyTag;
using match::PackageVerdict;
using rules::Rule;

namespace {

PackageVerdict verdict(const std::string& name, bool predicted, corpus::Label label) {
    PackageVerdict v;
    v.package = name;
    v.predicted = predicted;
    v.matched_count = predicted ? 1 : 0;
    v.label = label;
    return v;
}

Rule rule_with_strings(const std::string& name, const std::vector<std::string>& strings) {
    std::string text = "rule " + name + " { meta: d = \"t\" strings: ";
    for (std::size_t i = 0; i < strings.size(); ++i) {
        text += "$s" + std::to_string(i) + " = \"" + yara::escape_literal(strings[i]) + "\" ";
    }
    text += "condition: any of them }";
    auto outcome = yara::compile_yara(text);
    REQUIRE(std::holds_alternative<Rule>(outcome));
    return std::get<Rule>(std::move(outcome));
}

}  // namespace

TEST_CASE("confusion metrics: hand-computed values to 1e-12") {
    std::vector<PackageVerdict> verdicts;
    for (int i = 0; i < 2; ++i) {
        verdicts.push_back(verdict("tp" + std::to_string(i), true, corpus::Label::malicious));
    }
    verdicts.push_back(verdict("fp0", true, corpus::Label::legitimate));
    verdicts.push_back(verdict("fn0", false, corpus::Label::malicious));
    for (int i = 0; i < 6; ++i) {
        verdicts.push_back(verdict("tn" + std::to_string(i), false, corpus::Label::legitimate));
    }
    Metrics m = analytics::confusion_metrics(verdicts);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 6);
    REQUIRE(m.precision.has_value());
    REQUIRE(m.recall.has_value());
    REQUIRE(m.f1.has_value());
    CHECK(*m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(*m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(*m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(Metrics::percent(m.precision) == "66.7%");
    CHECK(Metrics::percent(m.accuracy) == "80.0%");
}

TEST_CASE("confusion metrics: perfect predictions and null handling") {
    std::vector<PackageVerdict> all_correct{
        verdict("a", true, corpus::Label::malicious),
        verdict("b", false, corpus::Label::legitimate),
    };
    Metrics perfect = analytics::confusion_metrics(all_correct);
    CHECK(perfect.accuracy == 1.0);
    CHECK(*perfect.precision == 1.0);
    CHECK(*perfect.f1 == 1.0);

    std::vector<PackageVerdict> no_positives{
        verdict("a", false, corpus::Label::malicious),
        verdict("b", false, corpus::Label::legitimate),
    };
    Metrics none = analytics::confusion_metrics(no_positives);
    CHECK_FALSE(none.precision.has_value());  // tp+fp == 0
    CHECK_FALSE(none.f1.has_value());
    CHECK(none.recall.has_value());
    CHECK(Metrics::percent(none.precision) == "n/a");

    CHECK_THROWS_AS((void)analytics::confusion_metrics({}), Error);
    // reordering never changes counts
    std::swap(all_correct[0], all_correct[1]);
    CHECK(analytics::confusion_metrics(all_correct).accuracy == 1.0);
}

TEST_CASE("per-rule precision with an unmatched bucket") {
    std::vector<analytics::RuleTally> tallies(3);
    tallies[0].rule_id = "pure";
    tallies[0].matched_malicious = {"m1", "m2"};
    tallies[1].rule_id = "mixed";
    tallies[1].matched_malicious = {"m1"};
    tallies[1].matched_legitimate = {"l1", "l2", "l3"};
    tallies[2].rule_id = "silent";

    auto report = analytics::per_rule_precision(tallies);
    REQUIRE(report.matched.size() == 2);
    REQUIRE(report.unmatched.size() == 1);
    CHECK(report.unmatched[0] == "silent");
    CHECK(report.matched[0].rule_id == "mixed");
    CHECK(*report.matched[0].precision == doctest::Approx(0.25));
    CHECK(report.matched[0].matched_count == 4);
    CHECK(report.matched[1].rule_id == "pure");
    CHECK(*report.matched[1].precision == doctest::Approx(1.0));
}

TEST_CASE("coverage CDF and frozen CSV") {
    CHECK(analytics::coverage_cdf({}).empty());

    auto single_step = analytics::coverage_cdf({1, 1, 1});
    REQUIRE(single_step.size() == 1);
    CHECK(single_step[0].x == 1);
    CHECK(single_step[0].y == doctest::Approx(1.0));

    auto cdf = analytics::coverage_cdf({1, 1, 3, 5});
    std::string expected =
        "detected_packages,cumulative_rule_fraction\n"
        "1,0.500000\n"
        "3,0.750000\n"
        "5,1.000000\n";
    CHECK(analytics::cdf_to_csv(cdf) == expected);
}

TEST_CASE("rule similarity and overlap report") {
    Rule a;
    a.name = "a";
    a.text = "abc";
    Rule b;
    b.name = "b";
    b.text = "abd";
    CHECK(analytics::rule_similarity(a, a) == doctest::Approx(1.0));
    CHECK(analytics::rule_similarity(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // 5 vs 5 with exactly two near-duplicate pairs at the 0.8 threshold
    auto mk = [](const std::string& name, const std::string& text) {
        Rule r;
        r.name = name;
        r.text = text;
        return r;
    };
    std::vector<Rule> set_a{
        mk("a0", "rule watch { strings: $a = \"gethostname\" condition: $a }"),
        mk("a1", "rule fetch { strings: $a = \"requests.get\" condition: $a }"),
        mk("a2", "rule env { strings: $a = \"os.environ\" condition: $a }"),
        mk("a3", "rule totally unlike anything else at all }"),
        mk("a4", "rule zzz { strings: $a = \"qqqq\" condition: $a }"),
    };
    std::vector<Rule> set_b{
        mk("b0", "rule watch { strings: $a = \"gethostname\" condition: $a }"),  // identical
        mk("b1", "rule fetch { strings: $b = \"requests.get\" condition: $b }"), // near-dup
        mk("b2", "import socket and do completely different things"),
        mk("b3", "another unrelated blob of text without structure"),
        mk("b4", "final unrelated entry in the second rule set"),
    };
    auto report = analytics::rule_overlap(set_a, set_b, 0.8);
    CHECK(report.overlap_count == 2);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.pairs[0].a_id == "a0");
    CHECK(report.pairs[0].b_id == "b0");
    CHECK(report.pairs[0].similarity == doctest::Approx(1.0));
    CHECK(report.pairs[1].a_id == "a1");
    CHECK(report.pairs[1].b_id == "b1");
}

TEST_CASE("taxonomy: builtin table shape and classification") {
    auto taxonomy = analytics::Taxonomy::builtin();
    CHECK(taxonomy.category_count() == 11);
    CHECK(taxonomy.entries.size() == 38);

    SUBCASE("network + exfiltration keywords tag both categories") {
        Rule rule = rule_with_strings("net_exfil", {"requests.get", "gethostname"});
        auto tags = analytics::classify_rule(rule, taxonomy);
        bool has_network = false;
        bool has_exfil = false;
        for (const auto& tag : tags) {
            if (tag.category == "Network Related") {
                has_network = true;
            }
            if (tag.category == "Data Exfiltration") {
                has_exfil = true;
            }
        }
        CHECK(has_network);
        CHECK(has_exfil);
    }

    SUBCASE("setup hook rule lands in Setup Code and more") {
        Rule rule = rule_with_strings("setup_hook", {"setup.py", "cmdclass", "requests.get"});
        auto tags = analytics::classify_rule(rule, taxonomy);
        std::set<std::string> categories;
        for (const auto& tag : tags) {
            categories.insert(tag.category);
        }
        CHECK(categories.contains("Setup Code"));
        CHECK(categories.contains("Network Related"));  // multiple categories allowed
    }

    SUBCASE("no keyword hit falls back to Other/Unknown") {
        Rule rule = rule_with_strings("bland", {"zzzzzz_nothing"});
        auto tags = analytics::classify_rule(rule, taxonomy);
        REQUIRE(tags.size() == 1);
        CHECK(tags.begin()->category == "Other");
        CHECK(tags.begin()->subcategory == "Unknown or Undetermined");
    }

    SUBCASE("meta fields do not trigger tags") {
        auto outcome = yara::compile_yara(
            "rule meta_only { meta: author = \"discord fan\" strings: $a = \"zzzz_blank\" "
            "condition: $a }");
        REQUIRE(std::holds_alternative<Rule>(outcome));
        auto tags = analytics::classify_rule(std::get<Rule>(outcome), taxonomy);
        REQUIRE(tags.size() == 1);
        CHECK(tags.begin()->category == "Other");
    }

    SUBCASE("bad taxonomy file raises") {
        CHECK_THROWS_AS((void)analytics::Taxonomy::from_json_text("{}"), Error);
        CHECK_THROWS_AS((void)analytics::Taxonomy::from_json_text("not json"), Error);
    }
}

TEST_CASE("score CDFs count absent scores") {
    std::vector<Rule> rule_set(3);
    rule_set[0].scores.confidence = 1.0;
    rule_set[1].scores.confidence = 1.0;
    rule_set[2].scores.risk = 0.5;
    auto cdfs = analytics::score_cdf(rule_set);
    REQUIRE(cdfs.confidence.size() == 1);  // degenerate: all present values equal
    CHECK(cdfs.confidence[0].first == 1.0);
    CHECK(cdfs.confidence[0].second == doctest::Approx(1.0));
    CHECK(cdfs.absent_confidence == 1);
    CHECK(cdfs.absent_maliciousness == 3);
    CHECK(cdfs.absent_risk == 2);
    CHECK(analytics::score_cdf({}).confidence.empty());
    CHECK(analytics::score_cdf_to_csv(cdfs.risk) ==
          "score,cumulative_fraction\n0.500000,1.000000\n");
}

TEST_CASE("category heatmap: symmetry, diagonal dominance, frozen CSV") {
    std::vector<std::set<TaxonomyTag>> tags_per_rule;
    tags_per_rule.push_back({TaxonomyTag{3, "Setup Code", "Malicious Setup Scripts"},
                             TaxonomyTag{4, "Network Related", "C2 Communication"}});
    tags_per_rule.push_back({TaxonomyTag{4, "Network Related", "Malicious Downloads"}});
    tags_per_rule.push_back({TaxonomyTag{3, "Setup Code", "Installation Hook Abuse"}});

    auto heatmap = analytics::category_heatmap(tags_per_rule);
    for (std::size_t i = 0; i < analytics::kCategoryCount; ++i) {
        for (std::size_t j = 0; j < analytics::kCategoryCount; ++j) {
            CHECK(heatmap[i][j] == heatmap[j][i]);
            CHECK(heatmap[i][i] >= heatmap[i][j]);
        }
    }
    CHECK(heatmap[3][3] == 2);
    CHECK(heatmap[4][4] == 2);
    CHECK(heatmap[3][4] == 1);

    // diagonal-only when every rule has a single category
    auto solo = analytics::category_heatmap({{TaxonomyTag{7, "Code Execution", "Script Injection"}}});
    for (std::size_t i = 0; i < analytics::kCategoryCount; ++i) {
        for (std::size_t j = 0; j < analytics::kCategoryCount; ++j) {
            if (i == j && i == 7) {
                CHECK(solo[i][j] == 1);
            } else {
                CHECK(solo[i][j] == 0);
            }
        }
    }

    auto empty = analytics::category_heatmap({});
    std::string csv = analytics::heatmap_to_csv(empty);
    CHECK(csv.substr(0, csv.find('\n')) == "category,0,1,2,3,4,5,6,7,8,9,10");
    CHECK(csv.find("\n0,0,0,0,0,0,0,0,0,0,0,0\n") != std::string::npos);
}

TEST_CASE("total tags can exceed the rule count (non-exclusive categories)") {
    auto taxonomy = analytics::Taxonomy::builtin();
    std::vector<Rule> rule_set{
        rule_with_strings("multi", {"setup.py", "requests.get", "gethostname"}),
        rule_with_strings("single", {"zz_nothing_zz"}),
    };
    std::size_t total_tags = 0;
    for (const auto& rule : rule_set) {
        total_tags += analytics::classify_rule(rule, taxonomy).size();
    }
    CHECK(total_tags >= rule_set.size());
}
