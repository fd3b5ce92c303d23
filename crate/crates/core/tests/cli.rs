use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use trellis::cli::{self, Cli};
use trellis::convcode::{ConvCode, Termination};
use trellis::sim::channel::awgn_transmit;
use trellis::sim::report::{BerReport, BerRow};
use trellis::sim::sweep::run_sweep;
use trellis::{hmm_viterbi, mlse_detect, HmmModel, IsiChannel};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trellis")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn parse(args: &[&str]) -> cli::Command {
    Cli::try_parse_from(std::iter::once("trellis").chain(args.iter().copied()))
        .unwrap()
        .command
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let info = "1011001110001011\n";
    let input = write(dir.path(), "info.txt", info);
    let coded = dir.path().join("coded.txt");
    let decoded = dir.path().join("decoded.txt");
    for preset in ["gsm", "is95", "nasa"] {
        stdout(&bin(&["encode", "--preset", preset, "--input", s(&input), "--output", s(&coded)]));
        let code = ConvCode::preset(preset).unwrap();
        let bits = cli::parse_bits(info).unwrap();
        assert_eq!(
            fs::read_to_string(&coded).unwrap(),
            cli::format_bits(&code.encode(&bits, Termination::ZeroTail).unwrap())
        );
        stdout(&bin(&["decode", "--preset", preset, "--input", s(&coded), "--output", s(&decoded)]));
        assert_eq!(fs::read_to_string(&decoded).unwrap(), info);
        let streamed = stdout(&bin(&["decode", "--preset", preset, "--input", s(&coded), "--depth", "40"]));
        assert_eq!(streamed, info);
    }
    assert_eq!(fs::read_to_string(&input).unwrap(), info);
}

#[test]
fn soft_decode_of_noisy_samples() {
    let dir = tempfile::tempdir().unwrap();
    let code = ConvCode::nasa();
    let info: Vec<u8> = (0..200).map(|i| ((i * 37 + 11) % 7 < 3) as u8).collect();
    let tx = code.encode(&info, Termination::ZeroTail).unwrap();
    let y = awgn_transmit(&tx, 6.0, 0.5, 3, 0).unwrap();
    let input = write(dir.path(), "rx.txt", &cli::format_samples(&y));
    for metric in ["euclidean", "soft"] {
        let out = stdout(&bin(&[
            "decode", "--preset", "nasa", "--metric", metric, "--sigma", "0.35", "--input", s(&input),
        ]));
        assert_eq!(cli::parse_bits(&out).unwrap(), info);
    }
}

#[test]
fn bad_octal_digit_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "code.ini", "# test code\n[code]\nmemory = 2\ngenerators_octal = 7, 9\n");
    let input = write(dir.path(), "info.txt", "101\n");
    let out = bin(&["encode", "--code", s(&cfg), "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":4"), "{err}");
    assert!(err.contains("code.ini"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let out = bin(&["sweep", "--preset", "nasa", "--snr", "1:1:2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    let out = bin(&["sweep", "--preset", "nasa", "--snr", "3:1:1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["encode", "--preset", "nope", "--input", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["sweep", "--preset", "nasa", "--metric", "soft", "--snr", "1:0.5:7", "--seed", "42", "--max-bits", "20000"];
    let mut args_a: Vec<&str> = base.to_vec();
    args_a.extend(["--output", s(&a), "--workers", "1"]);
    let mut args_b: Vec<&str> = base.to_vec();
    args_b.extend(["--output", s(&b), "--workers", "3"]);
    stdout(&bin(&args_a));
    stdout(&bin(&args_b));
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());

    let cli::Command::Sweep(args) = parse(&base) else { unreachable!() };
    let direct = run_sweep(&cli::sweep_config(&args).unwrap()).unwrap().to_csv();
    assert_eq!(String::from_utf8(text).unwrap(), direct);
}

#[test]
fn gain_prints_two_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let report = |shift: f64| {
        BerReport {
            rows: (0..6)
                .map(|i| {
                    let mut r = BerRow::new(i as f64 + shift, 1, 1_000_000, 1);
                    r.ber = 10f64.powi(-(i as i32));
                    r
                })
                .collect(),
            config: vec![("system".into(), "test".into())],
            seed: 1,
        }
        .to_csv()
    };
    let coded = write(dir.path(), "coded.csv", &report(0.0));
    let reference = write(dir.path(), "ref.csv", &report(1.25));
    let out = stdout(&bin(&["gain", "--coded", s(&coded), "--reference", s(&reference), "--target-ber", "1e-3"]));
    assert_eq!(out, "1.25\n");
    let out = bin(&["gain", "--coded", s(&coded), "--reference", s(&reference), "--target-ber", "1e-9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn isi_detect_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..64).map(|i| ((i * 13 % 5) as f64 - 2.0) * 0.9).collect();
    let input = write(dir.path(), "y.txt", &cli::format_samples(&samples));
    let out = stdout(&bin(&["isi-detect", "--preset", "class4", "--input", s(&input)]));
    let direct = mlse_detect(&IsiChannel::class4(), &samples, 1.0).unwrap().levels;
    assert_eq!(out, cli::format_samples(&direct));
    let cli::Command::IsiDetect(args) = parse(&["isi-detect", "--preset", "class4", "--input", s(&input)]) else {
        unreachable!()
    };
    assert_eq!(cli::isi_detect(&args).unwrap(), out);
    let thr = stdout(&bin(&["isi-detect", "--preset", "dicode", "--detector", "threshold", "--input", s(&input)]));
    assert_eq!(cli::parse_samples(&thr).unwrap().len(), samples.len());
}

fn weather() -> HmmModel {
    HmmModel::new(
        2,
        3,
        &[0.6, 0.4],
        &[0.7, 0.3, 0.4, 0.6],
        &[0.5, 0.4, 0.1, 0.1, 0.3, 0.6],
    )
    .unwrap()
}

#[test]
fn hmm_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let model_text = weather().to_json_string();
    let model = write(dir.path(), "model.json", &model_text);
    let data_text = "0 1 2\n2 2 1 0\n0 0\n";
    let data = write(dir.path(), "obs.txt", data_text);
    let scores = dir.path().join("scores.csv");
    let out = stdout(&bin(&["hmm-decode", "--model", s(&model), "--input", s(&data), "--scores", s(&scores)]));
    let expected: Vec<Vec<usize>> = cli::parse_symbols(data_text)
        .unwrap()
        .iter()
        .map(|o| hmm_viterbi(&weather(), o).unwrap().0)
        .collect();
    assert_eq!(out, cli::format_symbols(&expected));
    assert_eq!(fs::read_to_string(&scores).unwrap().lines().count(), 4);

    let trained = dir.path().join("trained.json");
    let out = bin(&["hmm-train", "--model", s(&model), "--input", s(&data), "--iterations", "3", "--output", s(&trained)]);
    stdout(&out);
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 3);
    let cli::Command::HmmTrain(args) = parse(&["hmm-train", "--model", s(&model), "--input", s(&data), "--iterations", "3"])
    else {
        unreachable!()
    };
    assert_eq!(fs::read_to_string(&trained).unwrap(), cli::hmm_train(&args).unwrap().0);
    HmmModel::from_json_file(&trained).unwrap();

    assert_eq!(fs::read_to_string(&model).unwrap(), model_text);
    assert_eq!(fs::read_to_string(&data).unwrap(), data_text);
}

#[test]
fn impossible_observation_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = HmmModel::new(2, 2, &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let model = write(dir.path(), "model.json", &m.to_json_string());
    let data = write(dir.path(), "obs.txt", "0 0\n0 1\n");
    let output = dir.path().join("paths.txt");
    let out = bin(&["hmm-decode", "--model", s(&model), "--input", s(&data), "--output", s(&output)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!output.exists());
    let bad = write(dir.path(), "bad.json", "{\n  \"n_states\": 2,\n  \"n_symbols\" 2\n}\n");
    let out = bin(&["hmm-decode", "--model", s(&bad), "--input", s(&data)]);
    assert_eq!(out.status.code(), Some(2));
}
