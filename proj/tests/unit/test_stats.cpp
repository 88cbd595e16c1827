#include <doctest.h>
#include <httplib.h>

#include <algorithm>
#include <numeric>
#include <thread>

#include "fn/image.hpp"
#include "fn/simd/kernels.hpp"
#include "fn/stats.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fn::stats;
using fn::catalog::ImageEntry;
using fn::catalog::Localization;
using fn::taxonomy::Rank;
using fn::testing::fixture;

namespace {

const fn::taxonomy::ConceptTree& tree() {
    static const auto t = fn::taxonomy::load_taxonomy_file(fixture("taxonomy.tsv"));
    return t;
}

ImageEntry image(std::string uuid, std::vector<std::string> concepts, std::optional<int> side = 100) {
    ImageEntry e;
    e.image.uuid = std::move(uuid);
    if (side) {
        e.image.width_px = *side;
        e.image.height_px = *side;
    }
    for (auto& c : concepts) {
        Localization l;
        l.concept_name = std::move(c);
        l.bbox = {0, 0, 10, 10};
        e.localizations.push_back(l);
    }
    return e;
}

RgbImage solid(int w, int h, float r, float g, float b) {
    RgbImage img;
    img.width = w;
    img.height = h;
    for (int i = 0; i < w * h; ++i) img.data.insert(img.data.end(), {r, g, b});
    return img;
}

RgbImage noise(std::mt19937_64& rng, int w, int h) {
    std::uniform_int_distribution<int> px(0, 255);
    RgbImage img;
    img.width = w;
    img.height = h;
    for (int i = 0; i < w * h * 3; ++i) img.data.push_back(static_cast<float>(px(rng)) / 255.0f);
    return img;
}

}  // namespace

TEST_CASE("instances per image") {
    std::vector<ImageEntry> snap{image("a", {"Aegina"}), image("b", {"Aegina"}), image("c", {"Aegina", "jelly"})};
    auto h = instances_per_image(snap);
    CHECK(h.counts == std::vector<std::int64_t>{0, 2, 1});
    CHECK(h.edges == std::vector<double>{0, 1, 2, 3});
    auto pct = h.percent();
    CHECK(pct[1] == doctest::Approx(200.0 / 3));
    CHECK(pct[2] == doctest::Approx(100.0 / 3));

    CHECK(instances_per_image(std::vector<ImageEntry>{image("a", {"Aegina"})}).percent()[1] == 100.0);
    CHECK(instances_per_image(std::vector<ImageEntry>{image("z", {})}).counts == std::vector<std::int64_t>{1});
    CHECK_THROWS_AS(instances_per_image({}), StatsError);

    auto t = tree();
    CHECK(mean_instances_and_concepts(snap, t, Rank::genus).instances == doctest::Approx(4.0 / 3.0));
    std::vector<ImageEntry> singles{image("a", {"Aegina"}), image("b", {"Paragorgia"})};
    auto m = mean_instances_and_concepts(singles, t, Rank::species);
    CHECK(m.instances == 1.0);
    CHECK(m.concepts == 1.0);
}

TEST_CASE("concepts per image collapse under rank_label") {
    std::vector<ImageEntry> snap{image("a", {"Bathochordaeus mcnutti", "Bathochordaeus"}), image("b", {})};
    CHECK(distinct_concepts(snap, tree(), Rank::genus) == std::vector<std::int64_t>{1, 0});
    CHECK(distinct_concepts(snap, tree(), Rank::species) == std::vector<std::int64_t>{2, 0});
    // unranked lineage counts under its own name
    std::vector<ImageEntry> gear{image("g", {"equipment", "trash"})};
    CHECK(distinct_concepts(gear, tree(), Rank::genus) == std::vector<std::int64_t>{2});
    std::vector<ImageEntry> bad{image("x", {"Nonexistus"})};
    CHECK_THROWS_AS(concepts_per_image(bad, tree(), Rank::genus), StatsError);
}

TEST_CASE("relative sizes") {
    auto edges = relative_size_edges();
    REQUIRE(edges.size() == 21);
    CHECK(edges.front() == doctest::Approx(1e-5));
    CHECK(edges.back() == 1.0);
    for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);

    ImageEntry e = image("a", {"Aegina", "Aegina", "Aegina"});
    e.localizations[1].bbox = {0, 0, 100, 100};  // full frame
    e.localizations[2].bbox = {0, 0, 0.01, 0.01};  // below the first edge
    std::vector<ImageEntry> snap{e, image("nodims", {"Aegina"}, std::nullopt)};
    auto d = relative_size_distribution(snap);
    CHECK(d.excluded == 1);
    CHECK(d.histogram.total == 3);
    CHECK(d.histogram.counts[12] == 1);  // 0.01 sits on the edge 10^-2
    CHECK(d.histogram.counts[19] == 1);
    CHECK(d.histogram.counts[0] == 1);
}

TEST_CASE("stats agree with brute-force oracles on random snapshots") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        auto recs = fn::testing::random_taxonomy(rng, 25);
        auto t = fn::taxonomy::ConceptTree::build(recs);
        auto snap = fn::testing::random_snapshot(rng, t, 20);

        auto inst = instances_per_image(snap);
        auto tally = fn::testing::oracle::tally(fn::testing::oracle::instances(snap));
        CHECK(std::accumulate(inst.counts.begin(), inst.counts.end(), std::int64_t{0}) == inst.total);
        for (std::size_t k = 0; k < inst.counts.size(); ++k) CHECK(inst.counts[k] == tally[static_cast<std::int64_t>(k)]);

        for (Rank r : {Rank::kingdom, Rank::klass, Rank::family, Rank::genus, Rank::species}) {
            auto expect = fn::testing::oracle::concepts(snap, recs, r);
            CHECK(distinct_concepts(snap, t, r) == expect);
            auto h = concepts_per_image(snap, t, r);
            auto ct = fn::testing::oracle::tally(expect);
            for (std::size_t k = 0; k < h.counts.size(); ++k) CHECK(h.counts[k] == ct[static_cast<std::int64_t>(k)]);
            auto pct = h.percent();
            CHECK(std::accumulate(pct.begin(), pct.end(), 0.0) == doctest::Approx(100.0).epsilon(1e-11));
        }

        auto sizes = relative_size_distribution(snap);
        auto expect = fn::testing::oracle::sizes(snap);
        CHECK(sizes.histogram.counts == expect.counts);
        CHECK(sizes.excluded == expect.excluded);
    }
}

TEST_CASE("coarsening never increases distinct concepts per image") {
    std::mt19937_64 rng(5);
    const Rank order[] = {Rank::species, Rank::genus, Rank::family, Rank::order, Rank::klass, Rank::phylum,
                          Rank::kingdom};
    for (int trial = 0; trial < 100; ++trial) {
        auto t = fn::taxonomy::ConceptTree::build(fn::testing::random_taxonomy(rng, 30));
        auto snap = fn::testing::random_snapshot(rng, t, 20);
        for (std::size_t i = 1; i < std::size(order); ++i) {
            auto fine = distinct_concepts(snap, t, order[i - 1]);
            auto coarse = distinct_concepts(snap, t, order[i]);
            for (std::size_t k = 0; k < fine.size(); ++k) CHECK(coarse[k] <= fine[k]);
        }
    }
}

TEST_CASE("splitmix64 matches the reference sequence") {
    SplitMix64 g(0);
    CHECK(g.next() == 0xe220a8397b1dcdafULL);
    CHECK(g.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(g.next() == 0x06c45d188009454fULL);
    SplitMix64 h(0);
    for (int i = 0; i < 1000; ++i) CHECK(h.uniform(7) < 7);
}

TEST_CASE("coverage sampling") {
    std::vector<ImageEntry> snap;
    for (int i = 0; i < 50; ++i) snap.push_back(image("m" + std::to_string(100 + i), {"Bathochordaeus mcnutti"}));
    snap.push_back(image("other", {"Aegina"}));
    snap.push_back(image("genus", {"Bathochordaeus"}));

    auto all = coverage_sample(snap, tree(), "Bathochordaeus mcnutti", Rank::species, 50, 1);
    CHECK(all.size() == 50);
    CHECK(std::find(all.begin(), all.end(), "genus") == all.end());
    auto wide = coverage_sample(snap, tree(), "Bathochordaeus mcnutti", Rank::genus, 100, 1);
    CHECK(wide.size() == 51);  // capped at the candidate count
    CHECK(coverage_sample(snap, tree(), "Bathochordaeus mcnutti", Rank::genus, 10, 42) ==
          coverage_sample(snap, tree(), "Bathochordaeus mcnutti", Rank::genus, 10, 42));
    CHECK_THROWS_AS(coverage_sample(snap, tree(), "Paragorgia", Rank::genus, 10, 1), StatsError);

    // pinned algorithm: candidates sorted by uuid, partial Fisher-Yates over SplitMix64
    std::vector<std::string> c;
    for (int i = 0; i < 50; ++i) c.push_back("m" + std::to_string(100 + i));
    SplitMix64 g(7);
    for (std::size_t i = 0; i < 5; ++i) std::swap(c[i], c[i + g.uniform(c.size() - i)]);
    c.resize(5);
    CHECK(coverage_sample(snap, tree(), "Bathochordaeus mcnutti", Rank::species, 5, 7) == c);
}

TEST_CASE("coverage sampling is uniform and seed-sensitive") {
    std::vector<ImageEntry> snap;
    for (int i = 0; i < 1000; ++i) snap.push_back(image("i" + std::to_string(10000 + i), {"Aegina citrea"}));
    auto a = coverage_sample(snap, tree(), "Aegina citrea", Rank::species, 50, 1);
    auto b = coverage_sample(snap, tree(), "Aegina citrea", Rank::species, 50, 2);
    std::set<std::string> sa(a.begin(), a.end());
    CHECK(sa.size() == 50);
    CHECK(a != b);

    // inclusion frequency over many seeds; each image expected 5% of the time
    std::vector<ImageEntry> small(snap.begin(), snap.begin() + 20);
    std::map<std::string, int> hits;
    const int seeds = 4000;
    for (int s = 0; s < seeds; ++s)
        for (const auto& u : coverage_sample(small, tree(), "Aegina citrea", Rank::species, 5, static_cast<std::uint64_t>(s)))
            ++hits[u];
    double chi2 = 0;
    const double expected = seeds * 5.0 / 20.0;
    for (const auto& e : small) chi2 += std::pow(hits[e.image.uuid] - expected, 2) / expected;
    CHECK(chi2 < 43.8);  // 99.9th percentile of chi-square with 19 dof
}

TEST_CASE("coverage recall") {
    auto reviewed = parse_review_csv(fn::testing::read_file(fixture("coverage_review.csv")));
    REQUIRE(reviewed.size() == 1);
    auto target = level_concepts(tree(), "Bathochordaeus mcnutti", Rank::species);
    auto r = coverage_recall(reviewed, target);
    CHECK(r.recall_target == 0.7);
    CHECK(r.recall_other == 0.5);
    CHECK(r.images[0].complete_target == 10);
    CHECK(r.images[0].existing_target == 7);

    ReviewedImage full{"f", {{"1", "Aegina"}}, {{"1", "Aegina"}}};
    CHECK(coverage_recall(std::vector{full}, {"Aegina"}).recall_target == 1.0);
    ReviewedImage none{"n", {}, {{"1", "Aegina"}}};
    CHECK(coverage_recall(std::vector{none}, {"Paragorgia"}).recall_target == 1.0);  // 0/0
    CHECK(coverage_recall(std::vector{none}, {"Aegina"}).recall_target == 0.0);
    // averaged per image
    CHECK(coverage_recall(std::vector{full, none}, {"Aegina"}).recall_target == 0.5);

    ReviewedImage inconsistent{"x", {{"9", "Aegina"}}, {{"1", "Aegina"}}};
    CHECK_THROWS_AS(coverage_recall(std::vector{inconsistent}, {"Aegina"}), StatsError);
    CHECK_THROWS_AS(parse_review_csv("image,annotation,concept,existing\nx,1,Aegina,perhaps\n"), StatsError);
}

TEST_CASE("coverage recall is monotone in existing annotations") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ReviewedImage> imgs(3);
        std::vector<std::pair<std::size_t, std::size_t>> missing;
        for (std::size_t i = 0; i < imgs.size(); ++i) {
            imgs[i].image = std::to_string(i);
            for (int k = 0; k < 6; ++k) {
                Annotation a{std::to_string(i) + "-" + std::to_string(k), rng() % 2 ? "Aegina" : "Paragorgia"};
                imgs[i].complete.push_back(a);
                if (rng() % 2) {
                    imgs[i].existing.push_back(a);
                } else {
                    missing.emplace_back(i, static_cast<std::size_t>(k));
                }
            }
        }
        if (missing.empty()) continue;
        auto before = coverage_recall(imgs, {"Aegina"});
        auto [i, k] = missing[rng() % missing.size()];
        imgs[i].existing.push_back(imgs[i].complete[k]);
        auto after = coverage_recall(imgs, {"Aegina"});
        CHECK(after.recall_target >= before.recall_target);
        CHECK(after.recall_other >= before.recall_other);
    }
}

TEST_CASE("bilinear resize") {
    auto img = solid(7, 5, 0.2f, 0.4f, 0.6f);
    auto r = resize_bilinear(img, 16, 16);
    for (float v : {r.at(0, 0, 0), r.at(15, 15, 0), r.at(8, 3, 0)}) CHECK(v == doctest::Approx(0.2f));

    // 2x1 gradient upsampled to 4x1: half-pixel centers map to -0.25, 0.25, 0.75, 1.25
    RgbImage g;
    g.width = 2;
    g.height = 1;
    g.data = {0, 0, 0, 1, 1, 1};
    auto u = resize_bilinear(g, 4, 1);
    CHECK(u.at(0, 0, 0) == 0.0f);
    CHECK(u.at(1, 0, 0) == doctest::Approx(0.25));
    CHECK(u.at(2, 0, 0) == doctest::Approx(0.75));
    CHECK(u.at(3, 0, 0) == 1.0f);
    // identity size is a copy
    std::mt19937_64 rng(1);
    auto n = noise(rng, 9, 4);
    CHECK(resize_bilinear(n, 9, 4).data == n.data);
}

TEST_CASE("PNG and PPM decoding") {
    std::mt19937_64 rng(2);
    auto img = noise(rng, 13, 6);
    auto png = encode_png(img);
    auto back = decode_image(png);
    REQUIRE(back);
    CHECK(back->width == 13);
    CHECK(back->height == 6);
    CHECK(back->data == img.data);

    auto ppm = decode_image("P3\n# comment\n2 1\n255\n255 0 0  0 0 255\n");
    REQUIRE(ppm);
    CHECK(ppm->data == std::vector<float>{1, 0, 0, 0, 0, 1});
    std::string p6 = "P6 1 1 255\n";
    p6 += std::string("\x00\x80\xff", 3);
    auto bin = decode_image(p6);
    REQUIRE(bin);
    CHECK(bin->data[1] == 128.0f / 255.0f);

    CHECK_FALSE(decode_image("not an image"));
    CHECK_FALSE(decode_image(png.substr(0, png.size() / 2)));
    CHECK_FALSE(decode_image("P6 2 2 255\n\x01"));
}

TEST_CASE("averaging") {
    fn::testing::TempDir dir;
    auto black = dir / "black.png", white = dir / "white.png", junk = dir / "junk.png";
    fn::testing::write_file(black, encode_png(solid(32, 20, 0, 0, 0)));
    fn::testing::write_file(white, encode_png(solid(10, 40, 1, 1, 1)));
    fn::testing::write_file(junk, "garbage");
    PixelCache cache(dir / "cache");

    auto avg = average_image(cache, {black.string(), "file://" + white.string(), junk.string(), (dir / "missing").string()});
    CHECK(avg.count == 2);
    CHECK(avg.skipped.size() == 2);
    CHECK(avg.mean.width == 128);
    for (float v : avg.mean.data) CHECK(v == 0.5f);
    CHECK_THROWS_AS(average_image(cache, {junk.string()}), StatsError);

    // identical inputs reproduce the resized input
    std::mt19937_64 rng(4);
    auto n = noise(rng, 40, 30);
    auto path = dir / "noise.png";
    fn::testing::write_file(path, encode_png(n));
    auto same = average_image(cache, {path.string(), path.string(), path.string()}, 16, 16);
    auto expect = resize_bilinear(n, 16, 16);
    for (std::size_t i = 0; i < expect.data.size(); ++i) CHECK(same.mean.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-6));
}

TEST_CASE("average image against a pixelwise oracle") {
    std::mt19937_64 rng(8);
    fn::testing::TempDir dir;
    PixelCache cache(dir / "cache");
    std::vector<std::string> paths;
    std::vector<RgbImage> images;
    for (int i = 0; i < 6; ++i) {
        std::uniform_int_distribution<int> side(1, 50);
        images.push_back(noise(rng, side(rng), side(rng)));
        paths.push_back((dir / ("n" + std::to_string(i) + ".png")).string());
        fn::testing::write_file(paths.back(), encode_png(images.back()));
    }
    const int W = 24, H = 18;
    // oracle: sample each source at the half-pixel-center position directly
    auto sample = [](const RgbImage& img, double sx, double sy, int c) {
        sx = std::clamp(sx, 0.0, img.width - 1.0);
        sy = std::clamp(sy, 0.0, img.height - 1.0);
        const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
        const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
        const double fx = sx - x0, fy = sy - y0;
        return (1 - fx) * (1 - fy) * img.at(x0, y0, c) + fx * (1 - fy) * img.at(x1, y0, c) +
               (1 - fx) * fy * img.at(x0, y1, c) + fx * fy * img.at(x1, y1, c);
    };
    auto avg = average_image(cache, paths, W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) {
                double sum = 0;
                for (const auto& img : images) {
                    sum += sample(img, (x + 0.5) * img.width / W - 0.5, (y + 0.5) * img.height / H - 0.5, c);
                }
                CHECK(std::abs(avg.mean.at(x, y, c) - sum / images.size()) < 1e-6);
            }

    // permutation invariance
    auto reversed = paths;
    std::reverse(reversed.begin(), reversed.end());
    auto again = average_image(cache, reversed, W, H);
    for (std::size_t i = 0; i < again.mean.data.size(); ++i) CHECK(std::abs(again.mean.data[i] - avg.mean.data[i]) < 1e-6);

    // every mean lies within the contributing range
    const auto r0 = resize_bilinear(images[0], W, H), r1 = resize_bilinear(images[1], W, H);
    const auto a = mean_of({r0, r1});
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        CHECK(a.data[i] >= std::min(r0.data[i], r1.data[i]));
        CHECK(a.data[i] <= std::max(r0.data[i], r1.data[i]));
    }
}

TEST_CASE("pixel cache bounds concurrency and caches remote fetches") {
    std::mt19937_64 rng(3);
    const auto body = encode_png(noise(rng, 4, 4));
    httplib::Server server;
    std::atomic<int> in_flight{0}, peak{0}, served{0};
    server.Get(R"(/img/(\d+)\.png)", [&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        ++served;
        --in_flight;
        res.set_content(body, "image/png");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    fn::testing::TempDir dir;
    {
        PixelCache cache(dir / "cache", 2);
        std::vector<std::string> urls;
        for (int i = 0; i < 8; ++i)
            urls.push_back("http://127.0.0.1:" + std::to_string(port) + "/img/" + std::to_string(i) + ".png");
        auto got = cache.fetch_all(urls);
        for (const auto& g : got) CHECK(g == body);
        CHECK(peak.load() <= 2);
        CHECK(served == 8);
        cache.fetch_all(urls);
        CHECK(served == 8);
        CHECK(cache.network_fetches() == 8);
    }
    {
        PixelCache reopened(dir / "cache", 2);
        CHECK(reopened.fetch("http://127.0.0.1:" + std::to_string(port) + "/img/3.png") == body);
        CHECK(served == 8);
    }
    server.stop();
    t.join();
}

TEST_CASE("averaging kernels agree across ISAs") {
    if (!fn::simd::avx2::supported()) return;
    std::mt19937_64 rng(12);
    std::vector<RgbImage> imgs;
    for (int i = 0; i < 5; ++i) imgs.push_back(noise(rng, 33, 17));
    fn::simd::force_isa(fn::simd::Isa::scalar);
    auto s = mean_of(imgs);
    fn::simd::force_isa(fn::simd::Isa::avx2);
    auto v = mean_of(imgs);
    fn::simd::reset_isa();
    CHECK(s.data == v.data);
}
