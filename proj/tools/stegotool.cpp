// stegotool: batch CLI over the steganography toolkit.
//
// Command tree:
//   image    {hide, extract, capacity, analyze}
//   audio    {hide, extract, tone}
//   spectrum {estimate, peak, compare}
//   text     {encode, decode, check-grammar}
//   vfs      {format, put, get, rm, ls, raw, slack-map, slack-hide,
//             slack-restore, ads-attach, ads-read, ads-scan, ads-remove,
//             export}
//
// Exit codes: 0 success, 1 usage, 2 format/parse, 3 capacity,
// 4 integrity/auth, 5 numeric. Stego artifacts are always written to files;
// errors never leave partially written outputs behind.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "stego/stego.hpp"

namespace fs = std::filesystem;
using namespace stego;

namespace {

Bytes read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read file: " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Write via a temp file + rename so a failure never leaves a partial output.
void write_file_atomic(const std::string& path, const Bytes& data) {
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp~");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write file: " + path);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) throw UsageError("short write: " + path);
    }
    fs::rename(tmp, target);
}

void write_file_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path, Bytes(text.begin(), text.end()));
}

std::optional<Passphrase> pass_of(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return Passphrase{text};
}

// Whole-command advisory exclusivity on a vfs image file.
class FileLock {
public:
    explicit FileLock(const std::string& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ >= 0) ::flock(fd_, LOCK_EX);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

DiskImage load_image(const std::string& path) { return DiskImage::load(read_file_bytes(path)); }

MimicGrammar grammar_from(const std::string& path) {
    if (path.empty()) return load_grammar(default_spam_grammar());
    const Bytes raw = read_file_bytes(path);
    return load_grammar(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

EstimatorConfig config_from(std::size_t nfft, int order, std::size_t lag) {
    EstimatorConfig cfg;
    cfg.nfft = nfft;
    cfg.order = order;
    if (lag > 0) cfg.bt_max_lag = lag;
    return cfg;
}

SpectrumEstimate run_estimator(const std::string& method, const Signal& sig,
                               const EstimatorConfig& cfg) {
    if (method == "periodogram") return periodogram(sig, cfg);
    if (method == "bt") return blackman_tukey(sig, cfg);
    if (method == "yw") return yule_walker(sig, cfg);
    if (method == "modcov") return modified_covariance(sig, cfg);
    if (method == "capon") return capon(sig, cfg);
    throw UsageError("unknown method '" + method +
                     "' (expected periodogram|bt|capon|yw|modcov)");
}

SlackSelection selection_from(const std::string& name, std::uint64_t seed) {
    if (name == "dumb") return {SlackSelection::Mode::dumb, seed};
    if (name == "random") return {SlackSelection::Mode::random, seed};
    if (name == "intelligent") return {SlackSelection::Mode::intelligent, seed};
    throw UsageError("unknown selection '" + name + "' (expected dumb|random|intelligent)");
}

SlackObfuscation obfuscation_from(const std::string& name, std::uint64_t seed,
                                  const std::string& xor_path) {
    if (name == "none") return SlackObfuscation::plain();
    if (name == "random-key") return SlackObfuscation::with_random_key(seed);
    if (name == "xor-file") {
        if (xor_path.empty()) throw UsageError("--obfuscate xor-file needs --xor-file");
        return SlackObfuscation::with_xor_file(read_file_bytes(xor_path));
    }
    throw UsageError("unknown obfuscation '" + name + "' (expected none|random-key|xor-file)");
}

struct Options {
    std::string cover, in, out, stego, metadata, grammar, xor_path;
    std::string pass, name, method = "periodogram", select = "dumb", obfuscate = "none";
    std::string image, vpath, stream, root = "/";
    int bits = 1, order = 4, levels = 1 << 20, trials = 100, channels = 1;
    std::size_t nfft = 1024, lag = 0, samples = 0, n = 256;
    std::uint32_t clusters = 0, spc = 4, rate = 8000, cluster_index = 0;
    std::uint64_t seed = 0;
    double freq = 0.4, amplitude = 1.0;
    bool streams = false;
    bool print_clamped = false;
};

void print_name_line(const std::string& name) {
    if (!name.empty()) std::cout << "name " << name << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steganography and steganalysis toolkit"};
    app.require_subcommand(1);
    std::function<void()> action;
    auto o = std::make_shared<Options>();

    // ---- image ----------------------------------------------------------
    auto* image = app.add_subcommand("image", "24-bit BMP carriers");
    image->require_subcommand(1);
    {
        auto* c = image->add_subcommand("hide", "embed a payload file in a BMP");
        c->add_option("--cover", o->cover, "cover BMP")->required();
        c->add_option("--in", o->in, "payload file")->required();
        c->add_option("--out", o->out, "stego BMP to write")->required();
        c->add_option("--bits", o->bits, "bits used per channel byte (1-8)")->required();
        c->add_option("--pass", o->pass, "optional DES passphrase");
        c->add_option("--name", o->name, "stored payload name (default: input filename)");
        c->callback([o] {
            const BmpImage cover = load_bmp(read_file_bytes(o->cover));
            const std::string name =
                o->name.empty() ? fs::path(o->in).filename().string() : o->name;
            const Bytes frame = frame_payload(read_file_bytes(o->in), name, pass_of(o->pass));
            write_file_atomic(o->out, save_bmp(bmp_embed(cover, frame, BitDepth(o->bits))));
        });
    }
    {
        auto* c = image->add_subcommand("extract", "recover a payload from a stego BMP");
        c->add_option("--in", o->in, "stego BMP")->required();
        c->add_option("--out", o->out, "where to write the payload")->required();
        c->add_option("--bits", o->bits, "bits used per channel byte (1-8)")->required();
        c->add_option("--pass", o->pass, "DES passphrase");
        c->callback([o] {
            const ParsedFrame got =
                bmp_extract(load_bmp(read_file_bytes(o->in)), BitDepth(o->bits), pass_of(o->pass));
            write_file_atomic(o->out, got.body);
            print_name_line(got.name);
        });
    }
    {
        auto* c = image->add_subcommand("capacity", "payload capacity of a cover BMP");
        c->add_option("--in", o->in, "cover BMP")->required();
        c->add_option("--bits", o->bits, "bits used per channel byte (1-8)")->required();
        c->callback([o] {
            const BmpImage img = load_bmp(read_file_bytes(o->in));
            const std::uint64_t cap = bmp_capacity(img, BitDepth(o->bits));
            std::cout << "capacity_bytes " << cap << "\n";
            std::cout << "max_body_bytes "
                      << (cap >= kFrameMinBytes ? cap - kFrameMinBytes : 0) << "\n";
        });
    }
    {
        auto* c = image->add_subcommand("analyze", "distortion between cover and stego");
        c->add_option("--cover", o->cover, "cover BMP")->required();
        c->add_option("--stego", o->stego, "stego BMP")->required();
        c->callback([o] {
            const Distortion d = bmp_distortion(load_bmp(read_file_bytes(o->cover)),
                                                load_bmp(read_file_bytes(o->stego)));
            std::printf("mse %.6f\n", d.mse);
            if (d.identical)
                std::printf("psnr_db identical\n");
            else
                std::printf("psnr_db %.3f\n", d.psnr_db);
        });
    }

    // ---- audio ----------------------------------------------------------
    auto* audio = app.add_subcommand("audio", "16-bit PCM WAV carriers");
    audio->require_subcommand(1);
    {
        auto* c = audio->add_subcommand("hide", "embed a payload file in a WAV");
        c->add_option("--cover", o->cover, "cover WAV")->required();
        c->add_option("--in", o->in, "payload file")->required();
        c->add_option("--out", o->out, "stego WAV to write")->required();
        c->add_option("--bits", o->bits, "bits used per sample (1-8)")->required();
        c->add_option("--pass", o->pass, "optional DES passphrase");
        c->add_option("--name", o->name, "stored payload name (default: input filename)");
        c->callback([o] {
            const WavAudio cover = load_wav(read_file_bytes(o->cover));
            const std::string name =
                o->name.empty() ? fs::path(o->in).filename().string() : o->name;
            const Bytes frame = frame_payload(read_file_bytes(o->in), name, pass_of(o->pass));
            write_file_atomic(o->out, save_wav(wav_embed(cover, frame, BitDepth(o->bits))));
        });
    }
    {
        auto* c = audio->add_subcommand("extract", "recover a payload from a stego WAV");
        c->add_option("--in", o->in, "stego WAV")->required();
        c->add_option("--out", o->out, "where to write the payload")->required();
        c->add_option("--bits", o->bits, "bits used per sample (1-8)")->required();
        c->add_option("--pass", o->pass, "DES passphrase");
        c->callback([o] {
            const ParsedFrame got =
                wav_extract(load_wav(read_file_bytes(o->in)), BitDepth(o->bits), pass_of(o->pass));
            write_file_atomic(o->out, got.body);
            print_name_line(got.name);
        });
    }
    {
        auto* c = audio->add_subcommand("tone", "add cos(pi * freq * n) to a WAV");
        c->add_option("--in", o->in, "input WAV (omit to synthesize silence)");
        c->add_option("--samples", o->samples, "sample count when synthesizing");
        c->add_option("--rate", o->rate, "sample rate when synthesizing")->capture_default_str();
        c->add_option("--channels", o->channels, "channels when synthesizing")
            ->capture_default_str();
        c->add_option("--out", o->out, "output WAV")->required();
        c->add_option("--freq", o->freq, "omega/pi in (0,1); 0.4 is the paper's tone")
            ->capture_default_str();
        c->add_option("--amplitude", o->amplitude, "relative to full scale")
            ->capture_default_str();
        c->callback([o] {
            WavAudio in;
            if (!o->in.empty()) {
                in = load_wav(read_file_bytes(o->in));
            } else {
                if (o->samples == 0)
                    throw UsageError("either --in or --samples is required");
                in = make_wav(o->rate, static_cast<std::uint16_t>(o->channels), o->samples);
            }
            const ToneResult r = add_tone(in, o->freq, o->amplitude);
            write_file_atomic(o->out, save_wav(r.audio));
            std::cout << "clipped " << r.clipped_samples << "\n";
        });
    }

    // ---- spectrum -------------------------------------------------------
    auto* spectrum = app.add_subcommand("spectrum", "power spectral density estimation");
    spectrum->require_subcommand(1);
    auto add_estimator_opts = [&](CLI::App* c, bool with_method = true) {
        c->add_option("--in", o->in, "16-bit PCM WAV input")->required();
        if (with_method)
            c->add_option("--method", o->method, "periodogram|bt|capon|yw|modcov")
                ->capture_default_str();
        c->add_option("--nfft", o->nfft, "grid size (power of two)")->capture_default_str();
        c->add_option("--order", o->order, "AR/Capon order p")->capture_default_str();
        c->add_option("--lag", o->lag, "Blackman-Tukey max lag (default N/5)");
        c->add_option("--channel", o->channels, "channel index for stereo input")
            ->capture_default_str();
    };
    {
        auto* c = spectrum->add_subcommand("estimate", "write a freq,power CSV");
        add_estimator_opts(c);
        c->add_option("--out", o->out, "CSV output file")->required();
        c->add_flag("--print-clamped", o->print_clamped,
                    "report Blackman-Tukey clamped bin count");
        c->callback([o] {
            const Signal sig = signal_from_wav(load_wav(read_file_bytes(o->in)),
                                               static_cast<std::uint16_t>(o->channels));
            const SpectrumEstimate est =
                run_estimator(o->method, sig, config_from(o->nfft, o->order, o->lag));
            write_file_atomic(o->out, spectrum_to_csv(est));
            if (o->print_clamped) std::cout << "clamped " << est.clamped << "\n";
        });
    }
    {
        auto* c = spectrum->add_subcommand("peak", "print the peak frequency");
        add_estimator_opts(c);
        c->callback([o] {
            const Signal sig = signal_from_wav(load_wav(read_file_bytes(o->in)),
                                               static_cast<std::uint16_t>(o->channels));
            const SpectrumEstimate est =
                run_estimator(o->method, sig, config_from(o->nfft, o->order, o->lag));
            std::printf("peak_frequency %.6f\n", peak_frequency(est));
        });
    }
    {
        auto* c = spectrum->add_subcommand(
            "compare", "Monte-Carlo variance: Blackman-Tukey vs periodogram");
        c->add_option("--trials", o->trials, "number of noise realizations")
            ->capture_default_str();
        c->add_option("--n", o->n, "samples per realization")->capture_default_str();
        c->add_option("--lag", o->lag, "Blackman-Tukey max lag")->capture_default_str();
        c->add_option("--nfft", o->nfft, "grid size (power of two)")->capture_default_str();
        c->add_option("--seed", o->seed, "base seed (trial t uses seed+t)")
            ->capture_default_str();
        c->add_option("--out", o->out, "CSV output file")->required();
        c->callback([o] {
            const VarianceComparison cmp = compare_estimator_variance(
                o->seed, o->trials, o->n, o->lag ? o->lag : o->n / 8, o->nfft);
            write_file_atomic(o->out, variance_to_csv(cmp));
            std::printf("bt_lower_fraction %.4f\n",
                        static_cast<double>(cmp.bins_bt_lower) /
                            static_cast<double>(cmp.freqs.size()));
        });
    }

    // ---- text -----------------------------------------------------------
    auto* text = app.add_subcommand("text", "grammar-based spam mimic");
    text->require_subcommand(1);
    {
        auto* c = text->add_subcommand("encode", "turn a payload into spam text");
        c->add_option("--in", o->in, "payload file")->required();
        c->add_option("--out", o->out, "text output file")->required();
        c->add_option("--grammar", o->grammar, "grammar file (default: built-in spam grammar)");
        c->add_option("--pass", o->pass, "optional DES passphrase");
        c->add_option("--name", o->name, "stored payload name (default: input filename)");
        c->callback([o] {
            const MimicGrammar g = grammar_from(o->grammar);
            const std::string name =
                o->name.empty() ? fs::path(o->in).filename().string() : o->name;
            const Bytes frame = frame_payload(read_file_bytes(o->in), name, pass_of(o->pass));
            write_file_atomic(o->out, mimic_encode(frame, g));
        });
    }
    {
        auto* c = text->add_subcommand("decode", "recover a payload from spam text");
        c->add_option("--in", o->in, "stego text file")->required();
        c->add_option("--out", o->out, "where to write the payload")->required();
        c->add_option("--grammar", o->grammar, "grammar file (default: built-in spam grammar)");
        c->add_option("--pass", o->pass, "DES passphrase");
        c->callback([o] {
            const MimicGrammar g = grammar_from(o->grammar);
            const Bytes raw = read_file_bytes(o->in);
            const ParsedFrame got =
                mimic_decode(std::string(raw.begin(), raw.end()), g, pass_of(o->pass));
            write_file_atomic(o->out, got.body);
            print_name_line(got.name);
        });
    }
    {
        auto* c = text->add_subcommand("check-grammar", "validate a mimic grammar");
        c->add_option("--grammar", o->grammar, "grammar file (default: built-in spam grammar)");
        c->callback([o] {
            MimicGrammar g = o->grammar.empty()
                                 ? parse_grammar(default_spam_grammar())
                                 : [&] {
                                       const Bytes raw = read_file_bytes(o->grammar);
                                       return parse_grammar(std::string_view(
                                           reinterpret_cast<const char*>(raw.data()),
                                           raw.size()));
                                   }();
            const auto issues = validate_grammar(g);
            for (const auto& i : issues) {
                std::cout << i.production;
                if (i.alternative >= 0) std::cout << " alternative " << i.alternative;
                std::cout << ": " << i.message << "\n";
            }
            if (!issues.empty())
                throw FormatError("grammar has " + std::to_string(issues.size()) +
                                  " violation(s)");
            std::cout << "grammar OK: " << g.productions.size() << " productions\n";
        });
    }

    // ---- vfs ------------------------------------------------------------
    auto* vfs = app.add_subcommand("vfs", "virtual disk: slack space and streams");
    vfs->require_subcommand(1);
    auto save_image = [](const std::string& path, const DiskImage& d) {
        write_file_atomic(path, d.save());
    };
    {
        auto* c = vfs->add_subcommand("format", "create an empty disk image");
        c->add_option("image", o->image, "image file to create")->required();
        c->add_option("--clusters", o->clusters, "cluster count")->required();
        c->add_option("--sectors-per-cluster", o->spc, "power of two, 1..128")
            ->capture_default_str();
        c->callback([o, save_image] {
            FileLock lock(o->image);
            save_image(o->image, DiskImage::format(o->clusters, o->spc));
        });
    }
    {
        auto* c = vfs->add_subcommand("put", "copy a file into the image");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath, "path inside the image")->required();
        c->add_option("--in", o->in, "local file")->required();
        c->callback([o, save_image] {
            FileLock lock(o->image);
            DiskImage d = load_image(o->image);
            d.write_file(o->vpath, read_file_bytes(o->in));
            save_image(o->image, d);
        });
    }
    {
        auto* c = vfs->add_subcommand("get", "copy a file out of the image");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->add_option("--out", o->out, "local file")->required();
        c->callback([o] {
            FileLock lock(o->image);
            write_file_atomic(o->out, load_image(o->image).read_file(o->vpath));
        });
    }
    {
        auto* c = vfs->add_subcommand("rm", "delete a file (content survives in clusters)");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->callback([o, save_image] {
            FileLock lock(o->image);
            DiskImage d = load_image(o->image);
            d.delete_file(o->vpath);
            save_image(o->image, d);
        });
    }
    {
        auto* c = vfs->add_subcommand("ls", "list files");
        c->add_option("image", o->image)->required();
        c->callback([o] {
            FileLock lock(o->image);
            const DiskImage d = load_image(o->image);
            for (const FileEntry& f : d.files()) {
                std::cout << f.path << " " << f.size << "\n";
                for (const StreamEntry& s : f.streams)
                    std::cout << f.path << ":" << s.name << " " << s.size << "\n";
            }
        });
    }
    {
        auto* c = vfs->add_subcommand("raw", "dump a raw cluster");
        c->add_option("image", o->image)->required();
        c->add_option("--cluster", o->cluster_index, "cluster index")->required();
        c->add_option("--out", o->out, "local file")->required();
        c->callback([o] {
            FileLock lock(o->image);
            write_file_atomic(o->out, load_image(o->image).read_raw(o->cluster_index));
        });
    }
    {
        auto* c = vfs->add_subcommand("slack-map", "list slack extents");
        c->add_option("image", o->image)->required();
        c->add_option("--root", o->root, "scope root")->capture_default_str();
        c->add_option("--levels", o->levels, "directory depth below the root");
        c->callback([o] {
            FileLock lock(o->image);
            for (const SlackExtent& e : load_image(o->image).slack_map(o->root, o->levels))
                std::cout << e.path << " cluster " << e.cluster << " offset " << e.offset
                          << " length " << e.length << " "
                          << (e.kind == SlackKind::ram_slack ? "ram_slack" : "file_slack")
                          << "\n";
        });
    }
    {
        auto* c = vfs->add_subcommand("slack-hide", "hide a payload in file slack");
        c->add_option("image", o->image)->required();
        c->add_option("--in", o->in, "payload file")->required();
        c->add_option("--metadata", o->metadata, "tracking metadata output")->required();
        c->add_option("--pass", o->pass, "metadata passphrase")->required();
        c->add_option("--select", o->select, "dumb|random|intelligent")->capture_default_str();
        c->add_option("--obfuscate", o->obfuscate, "none|random-key|xor-file")
            ->capture_default_str();
        c->add_option("--xor-file", o->xor_path, "key file for xor-file obfuscation");
        c->add_option("--seed", o->seed, "seed for random selection / random key")
            ->capture_default_str();
        c->add_option("--root", o->root, "scope root")->capture_default_str();
        c->add_option("--levels", o->levels, "directory depth below the root");
        c->callback([o, save_image] {
            FileLock lock(o->image);
            DiskImage d = load_image(o->image);
            const SlackHideResult r = d.slack_hide(
                read_file_bytes(o->in), Passphrase{o->pass}, selection_from(o->select, o->seed),
                obfuscation_from(o->obfuscate, o->seed, o->xor_path), o->root, o->levels);
            save_image(o->image, d);
            write_file_atomic(o->metadata, r.metadata);
            std::cout << "chunks " << r.chunk_count << "\n";
        });
    }
    {
        auto* c = vfs->add_subcommand("slack-restore", "recover a payload from file slack");
        c->add_option("image", o->image)->required();
        c->add_option("--metadata", o->metadata, "tracking metadata file")->required();
        c->add_option("--pass", o->pass, "metadata passphrase")->required();
        c->add_option("--out", o->out, "restored payload output")->required();
        c->add_option("--xor-file", o->xor_path, "key file for xor-file obfuscation");
        c->callback([o] {
            FileLock lock(o->image);
            const std::optional<Bytes> key =
                o->xor_path.empty() ? std::nullopt
                                    : std::optional<Bytes>{read_file_bytes(o->xor_path)};
            write_file_atomic(o->out,
                              load_image(o->image).slack_restore(read_file_bytes(o->metadata),
                                                                 Passphrase{o->pass}, key));
        });
    }
    {
        auto* c = vfs->add_subcommand("ads-attach", "attach an alternate data stream");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->add_option("stream", o->stream)->required();
        c->add_option("--in", o->in, "stream content file")->required();
        c->callback([o, save_image] {
            FileLock lock(o->image);
            DiskImage d = load_image(o->image);
            d.ads_attach(o->vpath, o->stream, read_file_bytes(o->in));
            save_image(o->image, d);
        });
    }
    {
        auto* c = vfs->add_subcommand("ads-read", "read an alternate data stream");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->add_option("stream", o->stream)->required();
        c->add_option("--out", o->out, "local file")->required();
        c->callback([o] {
            FileLock lock(o->image);
            write_file_atomic(o->out, load_image(o->image).ads_read(o->vpath, o->stream));
        });
    }
    {
        auto* c = vfs->add_subcommand("ads-scan", "enumerate alternate data streams");
        c->add_option("image", o->image)->required();
        c->add_option("--root", o->root, "scope root")->capture_default_str();
        c->add_option("--levels", o->levels, "directory depth below the root");
        c->callback([o] {
            FileLock lock(o->image);
            for (const AdsEntry& e : load_image(o->image).ads_scan(o->root, o->levels))
                std::cout << format_ads_entry(e) << "\n";
        });
    }
    {
        auto* c = vfs->add_subcommand("ads-remove", "remove an alternate data stream");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->add_option("stream", o->stream)->required();
        c->callback([o, save_image] {
            FileLock lock(o->image);
            DiskImage d = load_image(o->image);
            d.ads_remove(o->vpath, o->stream);
            save_image(o->image, d);
        });
    }
    {
        auto* c = vfs->add_subcommand("export",
                                      "copy a file out, FAT-style (streams dropped unless "
                                      "--streams)");
        c->add_option("image", o->image)->required();
        c->add_option("path", o->vpath)->required();
        c->add_option("--out", o->out, "local file for the main content")->required();
        c->add_flag("--streams", o->streams, "also write streams as <out>.<stream>");
        c->callback([o] {
            FileLock lock(o->image);
            const ExportResult r = load_image(o->image).export_file(o->vpath, o->streams);
            write_file_atomic(o->out, r.main);
            for (const auto& [name, bytes] : r.streams) {
                write_file_atomic(o->out + "." + name, bytes);
                std::cout << "stream " << name << " -> " << o->out << "." << name << "\n";
            }
            for (const std::string& name : r.dropped)
                std::cerr << "warning: stream '" << name << "' will be lost in the copy\n";
        });
    }

    try {
        app.parse(argc, argv); // subcommand callbacks run inside parse
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints the help text, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
