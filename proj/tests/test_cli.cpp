#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "stego/bmp.hpp"
#include "stego/wav.hpp"

#include "helpers.hpp"

// End-to-end tests against the built binary.

namespace fs = std::filesystem;
using namespace stego;
using testutil::random_bytes;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

class Workspace {
public:
    Workspace() {
        dir_ = fs::temp_directory_path() /
               ("stegotool-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const Bytes& data) const {
        std::ofstream out(path(name), std::ios::binary);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
    }

    Bytes read(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        REQUIRE(in.good());
        return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    CliResult run(const std::string& args) const {
        const std::string out_file = path("__stdout"), err_file = path("__stderr");
        const std::string cmd = std::string(STEGOTOOL_PATH) + " " + args + " >" + out_file +
                                " 2>" + err_file;
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out_file);
        r.err = slurp(err_file);
        return r;
    }

private:
    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    }

    fs::path dir_;
    static inline int counter_ = 0;
};

} // namespace

TEST_CASE("image hide / extract round trip") {
    Workspace ws;
    ws.write("cover.bmp", save_bmp(testutil::random_bmp(32, 32, 1)));
    const Bytes secret = random_bytes(200, 2);
    ws.write("secret.bin", secret);

    const CliResult hide = ws.run("image hide --cover " + ws.path("cover.bmp") + " --in " +
                                  ws.path("secret.bin") + " --out " + ws.path("stego.bmp") +
                                  " --bits 2 --pass pw");
    REQUIRE(hide.exit_code == 0);

    const CliResult extract = ws.run("image extract --in " + ws.path("stego.bmp") +
                                     " --bits 2 --pass pw --out " + ws.path("restored.bin"));
    REQUIRE(extract.exit_code == 0);
    CHECK(extract.out == "name secret.bin\n");
    CHECK(ws.read("restored.bin") == secret);
}

TEST_CASE("capacity overflow exits 3 with needed/available") {
    Workspace ws;
    ws.write("cover.bmp", save_bmp(make_bmp(4, 4)));
    ws.write("big.bin", random_bytes(4000, 3));
    const CliResult r = ws.run("image hide --cover " + ws.path("cover.bmp") + " --in " +
                               ws.path("big.bin") + " --out " + ws.path("x.bmp") + " --bits 1");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("needed") != std::string::npos);
    CHECK(r.err.find("available") != std::string::npos);
    CHECK_FALSE(fs::exists(ws.path("x.bmp"))); // no partial output
}

TEST_CASE("wrong passphrase exits 4") {
    Workspace ws;
    ws.write("cover.bmp", save_bmp(testutil::random_bmp(24, 24, 4)));
    ws.write("s.bin", random_bytes(64, 5));
    REQUIRE(ws.run("image hide --cover " + ws.path("cover.bmp") + " --in " + ws.path("s.bin") +
                   " --out " + ws.path("st.bmp") + " --bits 1 --pass right")
                .exit_code == 0);
    const CliResult r = ws.run("image extract --in " + ws.path("st.bmp") +
                               " --bits 1 --pass wrong --out " + ws.path("r.bin"));
    CHECK(r.exit_code == 4);
}

TEST_CASE("bad carrier file exits 2, unknown flag exits 1, help exits 0") {
    Workspace ws;
    ws.write("notbmp.bmp", to_bytes("certainly not a bitmap"));
    CHECK(ws.run("image capacity --in " + ws.path("notbmp.bmp") + " --bits 1").exit_code == 2);
    CHECK(ws.run("image capacity --in x --bits 1 --bogus-flag").exit_code == 1);
    CHECK(ws.run("--help").exit_code == 0);
    CHECK(ws.run("image --help").exit_code == 0);
    CHECK(ws.run("vfs --help").exit_code == 0);
}

TEST_CASE("audio round trip and tone synthesis") {
    Workspace ws;
    ws.write("cover.wav", save_wav(testutil::random_wav(4000, 6)));
    const Bytes secret = random_bytes(150, 7);
    ws.write("s.bin", secret);

    REQUIRE(ws.run("audio hide --cover " + ws.path("cover.wav") + " --in " + ws.path("s.bin") +
                   " --out " + ws.path("st.wav") + " --bits 3")
                .exit_code == 0);
    const CliResult extract = ws.run("audio extract --in " + ws.path("st.wav") +
                                     " --bits 3 --out " + ws.path("r.bin"));
    REQUIRE(extract.exit_code == 0);
    CHECK(ws.read("r.bin") == secret);

    const CliResult tone = ws.run("audio tone --samples 1024 --out " + ws.path("tone.wav") +
                                  " --freq 0.4 --amplitude 0.5");
    REQUIRE(tone.exit_code == 0);
    CHECK(tone.out == "clipped 0\n");

    const CliResult peak = ws.run("spectrum peak --in " + ws.path("tone.wav") +
                                  " --method periodogram");
    REQUIRE(peak.exit_code == 0);
    const double f = std::stod(peak.out.substr(peak.out.find(' ')));
    CHECK(std::abs(f - 0.2) < 0.002);
}

TEST_CASE("spectrum estimate and compare write CSV") {
    Workspace ws;
    REQUIRE(ws.run("audio tone --samples 512 --out " + ws.path("t.wav") + " --freq 0.3")
                .exit_code == 0);
    for (const std::string method : {"periodogram", "bt", "capon", "yw", "modcov"}) {
        const CliResult r = ws.run("spectrum estimate --in " + ws.path("t.wav") + " --method " +
                                   method + " --out " + ws.path(method + ".csv"));
        REQUIRE(r.exit_code == 0);
        const Bytes csv = ws.read(method + ".csv");
        CHECK(std::string(csv.begin(), csv.begin() + 11) == "freq,power\n");
    }
    const CliResult cmp = ws.run("spectrum compare --trials 20 --n 128 --lag 16 --nfft 256 "
                                 "--seed 1 --out " +
                                 ws.path("var.csv"));
    REQUIRE(cmp.exit_code == 0);
    CHECK(cmp.out.find("bt_lower_fraction") == 0);
}

TEST_CASE("text encode / decode round trip") {
    Workspace ws;
    const Bytes secret = to_bytes("This is a secret message!");
    ws.write("msg.bin", secret);
    REQUIRE(ws.run("text encode --in " + ws.path("msg.bin") + " --out " + ws.path("spam.txt"))
                .exit_code == 0);
    const Bytes spam = ws.read("spam.txt");
    CHECK(std::string(spam.begin(), spam.end()).find("Dear") != std::string::npos);

    const CliResult dec =
        ws.run("text decode --in " + ws.path("spam.txt") + " --out " + ws.path("back.bin"));
    REQUIRE(dec.exit_code == 0);
    CHECK(ws.read("back.bin") == secret);

    CHECK(ws.run("text check-grammar").out.find("grammar OK") == 0);
}

TEST_CASE("vfs end-to-end: put/get, slack hide/restore determinism, ads") {
    Workspace ws;
    const std::string img = ws.path("disk.img");
    REQUIRE(ws.run("vfs format " + img + " --clusters 64 --sectors-per-cluster 4").exit_code ==
            0);

    const Bytes doc = random_bytes(200, 8);
    ws.write("doc.bin", doc);
    REQUIRE(ws.run("vfs put " + img + " docs/doc.bin --in " + ws.path("doc.bin")).exit_code == 0);
    REQUIRE(ws.run("vfs get " + img + " docs/doc.bin --out " + ws.path("got.bin")).exit_code ==
            0);
    CHECK(ws.read("got.bin") == doc);

    const CliResult map = ws.run("vfs slack-map " + img);
    CHECK(map.out.find("ram_slack") != std::string::npos);
    CHECK(map.out.find("length 1536 file_slack") != std::string::npos);

    // Deterministic slack hiding: same seed -> identical image bytes.
    const Bytes payload = random_bytes(900, 9);
    ws.write("payload.bin", payload);
    const Bytes before = ws.read("disk.img");
    REQUIRE(ws.run("vfs slack-hide " + img + " --in " + ws.path("payload.bin") +
                   " --metadata " + ws.path("meta1.bin") +
                   " --pass pw --select random --seed 7 --obfuscate random-key")
                .exit_code == 0);
    const Bytes after1 = ws.read("disk.img");
    ws.write("disk.img", before); // reset
    REQUIRE(ws.run("vfs slack-hide " + img + " --in " + ws.path("payload.bin") +
                   " --metadata " + ws.path("meta2.bin") +
                   " --pass pw --select random --seed 7 --obfuscate random-key")
                .exit_code == 0);
    CHECK(ws.read("disk.img") == after1);
    CHECK(ws.read("meta1.bin") == ws.read("meta2.bin"));

    REQUIRE(ws.run("vfs slack-restore " + img + " --metadata " + ws.path("meta1.bin") +
                   " --pass pw --out " + ws.path("restored.bin"))
                .exit_code == 0);
    CHECK(ws.read("restored.bin") == payload);
    CHECK(ws.run("vfs slack-restore " + img + " --metadata " + ws.path("meta1.bin") +
                 " --pass nope --out " + ws.path("no.bin"))
              .exit_code == 4);

    // ADS lifecycle through the CLI.
    ws.write("calc.bin", random_bytes(300, 10));
    REQUIRE(ws.run("vfs ads-attach " + img + " docs/doc.bin calc.exe --in " +
                   ws.path("calc.bin"))
                .exit_code == 0);
    const CliResult scan = ws.run("vfs ads-scan " + img);
    CHECK(scan.out == "docs/doc.bin:calc.exe:$DATA 300\n");

    const CliResult exp = ws.run("vfs export " + img + " docs/doc.bin --out " +
                                 ws.path("exported.bin"));
    REQUIRE(exp.exit_code == 0);
    CHECK(exp.err.find("calc.exe") != std::string::npos); // dropped-stream warning
    CHECK(ws.read("exported.bin") == doc);

    REQUIRE(ws.run("vfs ads-remove " + img + " docs/doc.bin calc.exe").exit_code == 0);
    CHECK(ws.run("vfs ads-scan " + img).out.empty());
}
