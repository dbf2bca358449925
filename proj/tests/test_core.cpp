#include "doctest.h"

#include "deceptor/core.hpp"

using namespace deceptor;

namespace {

Sample sms_sample() {
    Sample s;
    s.sample_id = "sms1";
    s.fields = {{"sms", "WIN a prize now"}};
    s.true_label = ClassLabel{"spam", "spam"};
    s.perturbable_field = "sms";
    return s;
}

}  // namespace

TEST_CASE("validate_sample accepts a well-formed record") {
    CHECK_NOTHROW(validate_sample(sms_sample()));
}

TEST_CASE("validate_sample rejects a missing perturbable field") {
    Sample s = sms_sample();
    s.perturbable_field = "statement";
    CHECK_THROWS_AS(validate_sample(s), MissingPerturbableField);
}

TEST_CASE("validate_sample rejects empty perturbable text") {
    Sample s = sms_sample();
    s.fields[0].second = "";
    CHECK_THROWS_AS(validate_sample(s), EmptyText);
}

TEST_CASE("multi-field records classify the full map but perturb one field") {
    Sample s;
    s.sample_id = "liar1";
    s.fields = {{"statement", "Says the sky tax was abolished."},
                {"speaker", "someone"},
                {"context", "a rally"}};
    s.true_label = ClassLabel{"pants-fire", "Pants On Fire"};
    s.perturbable_field = "statement";
    CHECK_NOTHROW(validate_sample(s));
    CHECK(s.perturbable_text() == "Says the sky tax was abolished.");

    const Sample mutated = s.with_perturbed("Reports say the sky tax ended.");
    CHECK(mutated.perturbable_text() == "Reports say the sky tax ended.");
    CHECK(*mutated.field("speaker") == "someone");   // untouched
    CHECK(*mutated.field("context") == "a rally");
    CHECK(*s.field("statement") == "Says the sky tax was abolished.");  // original intact
}

TEST_CASE("chat history enforces alternation after a leading system message") {
    ChatHistory h;
    h.append(MessageRole::system, "be brief");
    h.append(MessageRole::user, "hello");
    h.append(MessageRole::assistant, "hi");
    h.append(MessageRole::user, "again");
    CHECK(h.size() == 4);
    CHECK(h.user_turns() == 2);
    CHECK(h.last_user_message()->content == "again");

    SUBCASE("system only allowed first") {
        CHECK_THROWS_AS(h.append(MessageRole::system, "late"), Error);
    }
    SUBCASE("user cannot follow user") {
        CHECK_THROWS_AS(h.append(MessageRole::user, "twice"), Error);
    }
    SUBCASE("assistant must follow user") {
        ChatHistory fresh;
        CHECK_THROWS_AS(fresh.append(MessageRole::assistant, "orphan"), Error);
    }
    SUBCASE("empty content rejected") {
        CHECK_THROWS_AS(h.append(MessageRole::assistant, ""), Error);
    }
}

TEST_CASE("attack config invariants") {
    AttackConfig cfg;
    CHECK(cfg.max_steps == 8);
    CHECK(cfg.similarity_threshold == doctest::Approx(6.0));
    CHECK_NOTHROW(cfg.validate());

    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.max_steps = 1;
    cfg.similarity_threshold = 0.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.similarity_threshold = 10.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("fnv1a64 is the reference function") {
    // reference values of the 64-bit FNV-1a parameters
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64_hex("hello") != fnv1a64_hex("hellp"));
}

TEST_CASE("success status is derivable from the stored final iteration") {
    // status must equal the gate recomputed from the last iteration's fields
    const ClassLabel spam{"spam", "spam"};
    const ClassLabel ham{"ham", "ham"};
    const double tau = 7.0;

    AttackOutcome o;
    o.sample_id = "sms1";
    o.status = AttackStatus::success;
    o.final_text = "calm rewrite";
    IterationRecord rec;
    rec.index = 0;
    rec.candidate_text = "calm rewrite";
    rec.target_prediction = ham;
    rec.similarity = SimilarityScore{9.0, "9"};
    o.iterations.push_back(rec);

    auto derived = [&](const AttackOutcome& out) {
        const IterationRecord& last = out.iterations.back();
        const bool deceived = last.target_prediction != spam;
        const bool sim_ok = last.similarity && last.similarity->value >= tau;
        return deceived && sim_ok ? AttackStatus::success : AttackStatus::failed;
    };
    CHECK(derived(o) == o.status);

    o.iterations.back().similarity = SimilarityScore{5.0, "5"};
    o.status = AttackStatus::failed;
    o.final_text.reset();
    CHECK(derived(o) == o.status);
}
