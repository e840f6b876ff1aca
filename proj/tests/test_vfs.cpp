#include <catch2/catch_amalgamated.hpp>

#include "stego/vfs.hpp"

#include "helpers.hpp"

using namespace stego;
using testutil::random_bytes;

namespace {

// 2048-byte clusters, as in the worked slack example.
DiskImage small_disk(std::uint32_t clusters = 64) { return DiskImage::format(clusters, 4); }

const Passphrase kPass{"slackpass"};

} // namespace

TEST_CASE("format examples") {
    const DiskImage d = DiskImage::format(1024, 4);
    CHECK(d.cluster_bytes() == 2048);
    CHECK(d.cluster_count() == 1024);
    CHECK(d.free_clusters() == 1024);

    const DiskImage single = DiskImage::format(1, 1);
    CHECK(single.cluster_bytes() == 512);

    CHECK_THROWS_AS(DiskImage::format(16, 3), UsageError);   // not a power of two
    CHECK_THROWS_AS(DiskImage::format(0, 4), UsageError);
    CHECK_THROWS_AS(DiskImage::format(16, 256), UsageError);
}

TEST_CASE("a 200-byte file on 2048-byte clusters leaves 1848 bytes of slack") {
    DiskImage d = small_disk();
    d.write_file("doc.txt", random_bytes(200, 1));

    const auto extents = d.slack_map();
    REQUIRE(extents.size() == 2);
    CHECK(extents[0].kind == SlackKind::ram_slack);
    CHECK(extents[0].offset == 200);
    CHECK(extents[0].length == 312); // to the end of the 512-byte sector
    CHECK(extents[1].kind == SlackKind::file_slack);
    CHECK(extents[1].offset == 512);
    CHECK(extents[1].length == 1536); // three whole sectors
    CHECK(extents[0].length + extents[1].length == 1848);
}

TEST_CASE("write/read round trip and content placement") {
    DiskImage d = small_disk();
    const Bytes content = random_bytes(5000, 2); // 3 clusters
    d.write_file("a/b/data.bin", content);
    CHECK(d.read_file("a/b/data.bin") == content);
    CHECK(d.free_clusters() == 64 - 3);
    d.validate();

    SECTION("duplicate path rejected") {
        CHECK_THROWS_AS(d.write_file("a/b/data.bin", {}), UsageError);
    }
    SECTION("missing path rejected") {
        CHECK_THROWS_AS(d.read_file("nope.bin"), UsageError);
    }
    SECTION("path normalization") {
        CHECK(d.read_file("/a//b/data.bin") == content);
        CHECK_THROWS_AS(d.write_file("bad:name", {}), UsageError);
        CHECK_THROWS_AS(d.write_file("../up", {}), UsageError);
    }
    SECTION("disk full reports needed versus free") {
        CHECK_THROWS_WITH(d.write_file("big", random_bytes(64 * 2048, 3)),
                          Catch::Matchers::ContainsSubstring("disk full"));
    }
}

TEST_CASE("zero-byte files own no clusters and no slack") {
    DiskImage d = small_disk();
    d.write_file("empty", {});
    CHECK(d.read_file("empty").empty());
    CHECK(d.free_clusters() == 64);
    CHECK(d.slack_map().empty());
    d.validate();
}

TEST_CASE("RAM slack is zeroed on write, file slack keeps residue") {
    DiskImage d = small_disk();
    // First occupant fills a whole cluster with ones.
    d.write_file("first", Bytes(2048, 0xAA));
    d.delete_file("first");
    // Residue is still readable raw.
    CHECK(d.read_raw(0) == Bytes(2048, 0xAA));

    // A 200-byte file reuses cluster 0 (first fit).
    d.write_file("second", Bytes(200, 0x11));
    const Bytes raw = d.read_raw(0);
    for (std::size_t i = 0; i < 200; ++i) CHECK(raw[i] == 0x11);
    for (std::size_t i = 200; i < 512; ++i) CHECK(raw[i] == 0x00);   // RAM slack zeroed
    for (std::size_t i = 512; i < 2048; ++i) CHECK(raw[i] == 0xAA);  // file slack residue
}

TEST_CASE("delete keeps content until clusters are reused") {
    DiskImage d = small_disk();
    const Bytes content = random_bytes(1000, 5);
    d.write_file("victim", content);
    d.delete_file("victim");
    CHECK_THROWS_AS(d.read_file("victim"), UsageError);
    CHECK_THROWS_AS(d.delete_file("victim"), UsageError);
    CHECK(d.free_clusters() == 64);

    const Bytes raw = d.read_raw(0);
    CHECK(Bytes(raw.begin(), raw.begin() + 1000) == content);

    // A larger newcomer overwrites the leading residue.
    d.write_file("newcomer", random_bytes(4096, 6));
    const Bytes after = d.read_raw(0);
    CHECK(Bytes(after.begin(), after.begin() + 1000) != content);
}

TEST_CASE("read_raw bounds and freshly formatted zeros") {
    const DiskImage d = small_disk(2);
    CHECK(d.read_raw(0) == Bytes(2048, 0));
    CHECK_THROWS_AS(d.read_raw(2), UsageError);
}

TEST_CASE("slack_map scope and filters") {
    DiskImage d = small_disk();
    d.write_file("top.bin", random_bytes(100, 7));
    d.write_file("dir/mid.bin", random_bytes(100, 8));
    d.write_file("dir/sub/deep.bin", random_bytes(100, 9));
    d.write_file("exact.bin", random_bytes(2048, 10)); // zero slack

    CHECK(d.slack_map("/", 0).size() == 2);      // top.bin only (exact.bin has no slack)
    CHECK(d.slack_map("/", 1).size() == 4);      // + dir/mid.bin
    CHECK(d.slack_map("/", 2).size() == 6);      // + dir/sub/deep.bin
    CHECK(d.slack_map("dir", 0).size() == 2);    // mid.bin relative to dir
    CHECK(d.slack_map("dir/sub", 0).size() == 2);
    CHECK_THROWS_AS(d.slack_map("ghost", 1), UsageError);

    const auto extents = d.slack_map();
    for (std::size_t i = 1; i < extents.size(); ++i)
        CHECK(extents[i - 1].path <= extents[i].path); // path-ordered
}

TEST_CASE("slack hide and restore across all selection and obfuscation modes") {
    const Bytes payload = random_bytes(3000, 20);
    const SlackSelection selections[] = {
        {SlackSelection::Mode::dumb, 0},
        {SlackSelection::Mode::random, 7},
        {SlackSelection::Mode::intelligent, 0},
    };
    const SlackObfuscation obfuscations[] = {
        SlackObfuscation::plain(),
        SlackObfuscation::with_random_key(11),
        SlackObfuscation::with_xor_file(to_bytes("xor-key-material")),
    };
    for (const auto& sel : selections) {
        for (const auto& obf : obfuscations) {
            DiskImage d = small_disk();
            d.write_file("a.bin", random_bytes(700, 21));
            d.write_file("b/c.bin", random_bytes(300, 22));
            d.write_file("d.bin", random_bytes(1800, 23));
            const Bytes a = d.read_file("a.bin");
            const Bytes b = d.read_file("b/c.bin");
            const Bytes c = d.read_file("d.bin");

            const SlackHideResult hidden = d.slack_hide(payload, kPass, sel, obf);
            d.validate();
            // Readable content, sizes and streams are untouched.
            CHECK(d.read_file("a.bin") == a);
            CHECK(d.read_file("b/c.bin") == b);
            CHECK(d.read_file("d.bin") == c);
            CHECK(d.ads_scan().empty());

            const std::optional<Bytes> key =
                obf.mode == SlackObfuscation::Mode::xor_file
                    ? std::optional<Bytes>{obf.key}
                    : std::nullopt;
            CHECK(d.slack_restore(hidden.metadata, kPass, key) == payload);
        }
    }
}

TEST_CASE("single-extent dumb hide lands in the documented extent") {
    DiskImage d = small_disk();
    d.write_file("carrier", random_bytes(200, 30)); // 1536 bytes of file slack
    const Bytes payload = random_bytes(1000, 31);
    const SlackHideResult hidden =
        d.slack_hide(payload, kPass, {SlackSelection::Mode::dumb, 0}, SlackObfuscation::plain());
    CHECK(hidden.chunk_count == 1);
    const Bytes raw = d.read_raw(0);
    CHECK(Bytes(raw.begin() + 512, raw.begin() + 512 + 1000) == payload);
    CHECK(d.slack_restore(hidden.metadata, kPass) == payload);
}

TEST_CASE("slack capacity boundary is exact") {
    DiskImage d = small_disk();
    d.write_file("carrier", random_bytes(200, 40)); // exactly 1536 file-slack bytes
    const SlackSelection sel{SlackSelection::Mode::dumb, 0};

    DiskImage fits = d;
    const Bytes exact = random_bytes(1536, 41);
    const SlackHideResult h = fits.slack_hide(exact, kPass, sel, SlackObfuscation::plain());
    CHECK(fits.slack_restore(h.metadata, kPass) == exact);

    DiskImage overflows = d;
    CHECK_THROWS_WITH(
        overflows.slack_hide(random_bytes(1537, 42), kPass, sel, SlackObfuscation::plain()),
        Catch::Matchers::ContainsSubstring("needed") &&
            Catch::Matchers::ContainsSubstring("available"));
}

TEST_CASE("hide is deterministic for fixed seeds") {
    auto build = [] {
        DiskImage d = small_disk();
        d.write_file("u.bin", random_bytes(900, 50));
        d.write_file("v.bin", random_bytes(500, 51));
        d.write_file("w.bin", random_bytes(100, 52));
        return d;
    };
    const Bytes payload = random_bytes(2500, 53);
    DiskImage d1 = build();
    DiskImage d2 = build();
    const SlackSelection sel{SlackSelection::Mode::random, 7};
    const SlackObfuscation obf = SlackObfuscation::with_random_key(9);
    const SlackHideResult h1 = d1.slack_hide(payload, kPass, sel, obf);
    const SlackHideResult h2 = d2.slack_hide(payload, kPass, sel, obf);
    CHECK(h1.metadata == h2.metadata);
    CHECK(d1.save() == d2.save());
}

TEST_CASE("rewriting a carrier file breaks the named chunk") {
    DiskImage d = small_disk();
    d.write_file("stable.bin", random_bytes(200, 60));
    d.write_file("volatile.bin", random_bytes(200, 61));
    const SlackHideResult hidden =
        d.slack_hide(random_bytes(2500, 62), kPass, {SlackSelection::Mode::dumb, 0},
                     SlackObfuscation::plain());

    // Rewrite grows the file so its new content covers the old slack sectors.
    d.delete_file("volatile.bin");
    d.write_file("volatile.bin", random_bytes(2048, 63));

    CHECK_THROWS_WITH(d.slack_restore(hidden.metadata, kPass),
                      Catch::Matchers::ContainsSubstring("volatile.bin"));
}

TEST_CASE("slack restore failure modes") {
    DiskImage d = small_disk();
    d.write_file("carrier", random_bytes(200, 70));
    const Bytes payload = random_bytes(800, 71);

    SECTION("wrong passphrase") {
        const SlackHideResult h = d.slack_hide(payload, kPass, {SlackSelection::Mode::dumb, 0},
                                               SlackObfuscation::plain());
        CHECK_THROWS_AS(d.slack_restore(h.metadata, Passphrase{"wrong"}), IntegrityError);
    }
    SECTION("empty passphrase on hide") {
        CHECK_THROWS_AS(d.slack_hide(payload, Passphrase{""}, {SlackSelection::Mode::dumb, 0},
                                     SlackObfuscation::plain()),
                        UsageError);
    }
    SECTION("xor key is required and checked") {
        const Bytes key = to_bytes("the-key");
        const SlackHideResult h = d.slack_hide(payload, kPass, {SlackSelection::Mode::dumb, 0},
                                               SlackObfuscation::with_xor_file(key));
        CHECK_THROWS_AS(d.slack_restore(h.metadata, kPass), UsageError);
        CHECK_THROWS_AS(d.slack_restore(h.metadata, kPass, Bytes{to_bytes("not-the-key")}),
                        IntegrityError);
        CHECK(d.slack_restore(h.metadata, kPass, key) == payload);
    }
}

TEST_CASE("alternate data streams lifecycle") {
    DiskImage d = small_disk();
    const Bytes main_content = to_bytes("non-important information");
    d.write_file("clear.txt", main_content);
    const Bytes secret = to_bytes("sensitive data");
    d.ads_attach("clear.txt", "secret.txt", secret);

    CHECK(d.ads_read("clear.txt", "secret.txt") == secret);
    CHECK(d.read_file("clear.txt") == main_content); // main content isolated
    d.validate();

    SECTION("scan formats like streams.exe") {
        const auto scan = d.ads_scan();
        REQUIRE(scan.size() == 1);
        CHECK(format_ads_entry(scan[0]) == "clear.txt:secret.txt:$DATA 14");
    }
    SECTION("duplicate and invalid names rejected") {
        CHECK_THROWS_AS(d.ads_attach("clear.txt", "secret.txt", {}), UsageError);
        CHECK_THROWS_AS(d.ads_attach("clear.txt", "a:b", {}), UsageError);
        CHECK_THROWS_AS(d.ads_attach("missing.txt", "s", {}), UsageError);
    }
    SECTION("remove frees the stream and keeps the main content") {
        d.ads_attach("clear.txt", "second", random_bytes(3000, 80));
        d.ads_remove("clear.txt", "secret.txt");
        CHECK_THROWS_AS(d.ads_read("clear.txt", "secret.txt"), UsageError);
        const auto scan = d.ads_scan();
        REQUIRE(scan.size() == 1); // the other stream survives
        CHECK(scan[0].stream == "second");
        CHECK(d.read_file("clear.txt") == main_content);
        CHECK_THROWS_AS(d.ads_remove("clear.txt", "secret.txt"), UsageError);
        d.validate();
    }
    SECTION("streams do not disturb slack maps of the main file") {
        const auto before = d.slack_map();
        d.ads_attach("clear.txt", "more", random_bytes(100, 81));
        const auto after = d.slack_map();
        REQUIRE(before.size() == after.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].cluster == after[i].cluster);
            CHECK(before[i].offset == after[i].offset);
            CHECK(before[i].length == after[i].length);
        }
    }
}

TEST_CASE("the winmine scenario: executable hidden in a stream") {
    DiskImage d = small_disk();
    d.write_file("winmine2.exe", random_bytes(4000, 90));
    const Bytes calc = random_bytes(2500, 91);
    d.ads_attach("winmine2.exe", "calc.exe", calc);

    const auto scan = d.ads_scan();
    REQUIRE(scan.size() == 1);
    CHECK(format_ads_entry(scan[0]) == "winmine2.exe:calc.exe:$DATA 2500");
    CHECK(d.ads_read("winmine2.exe", "calc.exe") == calc);
}

TEST_CASE("export drops or carries streams") {
    DiskImage d = small_disk();
    const Bytes main_content = random_bytes(600, 95);
    d.write_file("doc.txt", main_content);
    d.ads_attach("doc.txt", "hidden.bin", random_bytes(100, 96));

    const ExportResult fat = d.export_file("doc.txt", false);
    CHECK(fat.main == main_content);
    CHECK(fat.dropped == std::vector<std::string>{"hidden.bin"});
    CHECK(fat.streams.empty());

    const ExportResult full = d.export_file("doc.txt", true);
    CHECK(full.dropped.empty());
    REQUIRE(full.streams.size() == 1);
    CHECK(full.streams[0].first == "hidden.bin");

    const ExportResult plain = d.export_file("doc.txt", false);
    d.ads_remove("doc.txt", "hidden.bin");
    CHECK(d.export_file("doc.txt", false).dropped.empty());
    (void)plain;
}

TEST_CASE("image serialization round-trips byte-identically") {
    DiskImage d = small_disk(16);
    d.write_file("x/y.bin", random_bytes(3000, 100));
    d.write_file("z.bin", random_bytes(10, 101));
    d.ads_attach("z.bin", "s1", random_bytes(700, 102));
    d.delete_file("x/y.bin");
    d.write_file("x/y2.bin", random_bytes(100, 103));

    const Bytes img = d.save();
    const DiskImage loaded = DiskImage::load(img);
    CHECK(loaded.save() == img);
    CHECK(loaded.read_file("z.bin") == d.read_file("z.bin"));
    CHECK(loaded.ads_read("z.bin", "s1") == d.ads_read("z.bin", "s1"));

    SECTION("corrupt magic rejected") {
        Bytes bad = img;
        bad[0] = 'X';
        CHECK_THROWS_AS(DiskImage::load(bad), FormatError);
    }
    SECTION("truncated image rejected") {
        Bytes bad = img;
        bad.resize(bad.size() - 7);
        CHECK_THROWS_AS(DiskImage::load(bad), FormatError);
    }
}

TEST_CASE("allocation stays sound under random operation sequences") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        SplitMix64 rng(2000 + seed);
        DiskImage d = DiskImage::format(48, 2); // 1024-byte clusters
        std::vector<std::string> live;
        for (int step = 0; step < 120; ++step) {
            const auto roll = rng.next_below(10);
            try {
                if (roll < 4) {
                    const std::string path = "f" + std::to_string(rng.next_below(30));
                    d.write_file(path, random_bytes(rng.next_below(4000), rng.next()));
                    live.push_back(path);
                } else if (roll < 6 && !live.empty()) {
                    const std::size_t i = rng.next_below(live.size());
                    d.delete_file(live[i]);
                    live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
                } else if (roll < 8 && !live.empty()) {
                    d.ads_attach(live[rng.next_below(live.size())],
                                 "s" + std::to_string(rng.next_below(5)),
                                 random_bytes(rng.next_below(1500), rng.next()));
                } else if (!live.empty()) {
                    const auto scan = d.ads_scan();
                    if (!scan.empty()) {
                        const auto& pick = scan[rng.next_below(scan.size())];
                        d.ads_remove(pick.path, pick.stream);
                    }
                }
            } catch (const UsageError&) {
            } catch (const CapacityError&) {
            }
            d.validate();
        }
        const Bytes img = d.save();
        CHECK(DiskImage::load(img).save() == img);
    }
}
