import itertools
import json
import subprocess
import sys

import pytest

from greenmeta.cli import main
from greenmeta.dor_req import DorRequest


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_encode_req_worked_example(capsys):
    code, out, _ = run(capsys, "encode-req", "--loop-filters-off",
                       "--fracpel-off", "--width", "1280", "--height", "720",
                       "--fps", "30", "--ops-pct", "0")
    assert code == 0
    assert out.strip() == "7E45000B401E"


def test_decode_req(capsys):
    code, out, _ = run(capsys, "decode-req", "7E45000B401E")
    obj = json.loads(out)
    assert (obj["pic_width_in_luma_samples"], obj["pic_height_in_luma_samples"],
            obj["frames_per_second"]) == (1280, 720, 30)
    assert obj["disable_loop_filters"] == 1
    code, out, _ = run(capsys, "decode-req", "7E45000B401E", "--format", "text")
    assert "frames_per_second: 30" in out


def test_encode_decode_roundtrip_all_flags(capsys):
    for bits in itertools.product([False, True], repeat=4):
        flags = [f for f, on in zip(["--loop-filters-off", "--bi-off",
                                     "--intra-in-b-off", "--fracpel-off"],
                                    bits) if on]
        _, hexstr, _ = run(capsys, "encode-req", *flags, "--ops-pct", "-20",
                           "--width", "960", "--height", "540", "--fps", "25")
        hexstr = hexstr.strip()
        assert len(hexstr) == 12 and hexstr == hexstr.upper()
        _, out, _ = run(capsys, "decode-req", hexstr)
        req = DorRequest.from_json(json.loads(out))
        assert req.to_hex() == hexstr
        assert (req.disable_loop_filters, req.disable_bi_prediction,
                req.disable_intra_in_B, req.disable_fracpel_filtering) == bits


def test_domain_errors_exit_1(capsys):
    code, out, err = run(capsys, "encode-req", "--width", "16384")
    assert code == 1 and out == ""
    assert "pic_width_in_luma_samples" in err and err.count("\n") == 1
    code, _, err = run(capsys, "encode-req", "--ops-pct", "13")
    assert code == 1
    code, _, _ = run(capsys, "decode-req", "7E45")
    assert code == 1


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["encode-req", "--bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_plan(capsys):
    code, out, _ = run(capsys, "plan", "--profile", "table2/software/ClassE",
                       "--savings", "40")
    obj = json.loads(out)
    assert obj["label"] == "half fps" and obj["shortfall"] is False
    assert obj["request"]["frames_per_second"] == 30
    code, out, _ = run(capsys, "plan", "--profile", "table2/software/ClassE",
                       "--savings", "95", "--format", "text")
    assert "Res: 360p" in out and "shortfall" in out


def test_restore_plan(capsys):
    code, out, _ = run(capsys, "restore-plan", "--factor", "0.38",
                       "--tolerance", "0.05")
    obj = json.loads(out)
    assert obj["requests_pct"] == [64, 64]
    assert obj["requests_hex"][0] == DorRequest.from_percent(64).to_hex()
    code, _, err = run(capsys, "restore-plan", "--factor", "0.5",
                       "--tolerance", "1e-9", "--max-length", "2")
    assert code == 1 and "best residual" in err


def test_simulate(tmp_path, capsys):
    scen = {"duration_s": 100, "baseline_watts": 2.0, "static_watts": 0.0,
            "profile": "table2/hardware/ClassB",
            "events": [{"t_s": 0, "request_hex": "7C028005A000"}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scen))
    out_file = tmp_path / "ledger.json"
    code, out, _ = run(capsys, "simulate", "--scenario", str(path),
                       "--out", str(out_file))
    obj = json.loads(out)
    assert obj["realized_savings_pct"] == pytest.approx(78.21, abs=0.01)
    assert json.loads(out_file.read_text()) == obj
    code, out, _ = run(capsys, "simulate", "--scenario", str(path),
                       "--format", "text")
    assert "realized savings" in out


def test_derdo_select(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"tools": ["dbf", "fracpel"],
                                 "coefficients": [1.0, 2.0]}))
    cands = tmp_path / "c.json"
    cands.write_text(json.dumps([
        {"id": "qpel", "distortion": 5, "rate": 10, "counts": [1, 3]},
        {"id": "fullpel", "distortion": 9, "rate": 12, "counts": [1, 0]}]))
    _, out, _ = run(capsys, "derdo-select", "--model", str(model),
                    "--candidates", str(cands), "--lambda-rate", "0.1")
    assert json.loads(out)["selected"] == "qpel"
    _, out, _ = run(capsys, "derdo-select", "--model", str(model),
                    "--candidates", str(cands), "--lambda-rate", "0.1",
                    "--lambda-energy", "1", "--avoid-fracpel")
    obj = json.loads(out)
    assert obj["selected"] == "fullpel"
    assert obj["candidates"][0]["energy"] == 3 * 65536


def test_savings_and_bdrate(capsys):
    _, out, _ = run(capsys, "savings", "--reference", "100", "--test", "21.79")
    assert json.loads(out)["savings_pct"] == pytest.approx(78.21)
    _, out, _ = run(capsys, "bdrate", "--ref-rate", "100,200,400,800",
                    "--ref-quality", "30,33,36,39",
                    "--test-rate", "200,400,800,1600",
                    "--test-quality", "30,33,36,39")
    assert json.loads(out)["bd_rate_pct"] == pytest.approx(100, abs=0.05)
    _, out, _ = run(capsys, "bdrate", "--ref-rate", "100,200",
                    "--ref-quality", "30,38", "--test-rate", "100,200",
                    "--test-quality", "40,45", "--format", "text")
    assert out.strip() == "n/a"


def test_build_profile_and_plan_pipeline(tmp_path, capsys):
    csv_path = tmp_path / "m.csv"
    csv_path.write_text(
        "action,sequence,quality_metric,rate,quality,energy_ref,energy_test\n"
        "reference,S1,PSNR,100,30,,\nreference,S1,PSNR,200,34,,\n"
        "half fps,S1,PSNR,70,30,10,5.5\nhalf fps,S1,PSNR,140,34,12,6.6\n")
    prof_path = tmp_path / "p.json"
    code, out, _ = run(capsys, "build-profile", "--csv", str(csv_path),
                       "--backend", "hardware", "--content-class", "S",
                       "--out", str(prof_path))
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert entry["savings_pct"] == pytest.approx(45.0)
    assert entry["bdr_pct"] == pytest.approx(-30.0, abs=1e-6)
    code, out, _ = run(capsys, "plan", "--profile", str(prof_path),
                       "--savings", "30")
    assert json.loads(out)["request_hex"] == \
        DorRequest(frames_per_second=30).to_hex()


def test_profiles_listing(capsys):
    _, out, _ = run(capsys, "profiles")
    assert "table2/hardware/ClassB" in json.loads(out)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "greenmeta", "decode-req",
                           "7E45000B401E"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["frames_per_second"] == 30
