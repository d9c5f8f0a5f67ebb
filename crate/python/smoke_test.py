#!/usr/bin/env python3
"""End-to-end exercise of the fragmenta_py extension module.

Builds the cdylib with cargo, imports it from a scratch directory, and runs
the full pipeline: slice -> shuffle -> corrupt -> solve -> eval -> render,
plus bundle round trips and a miniature benchmark.
"""

import io
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

from PIL import Image

ROOT = Path(__file__).resolve().parents[1]


def build_extension(tmp: Path) -> Path:
    subprocess.run(
        ["cargo", "build", "--quiet", "-p", "fragmenta-py"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "debug" / "libfragmenta_py.so"
    target = tmp / "fragmenta_py.so"
    shutil.copy(lib, target)
    return target


def ramp_image(width: int, height: int) -> Image.Image:
    """Planar RGB ramps: every piece adjacency is unambiguous."""
    img = Image.new("RGB", (width, height))
    px = img.load()
    for y in range(height):
        for x in range(width):
            px[x, y] = (
                int(0.9 * y + 0.7 * x + 10),
                int(0.5 * y + 1.1 * x + 5),
                int(1.2 * y + 0.4 * x),
            )
    return img


def expect_value_error(fn, label):
    try:
        fn()
    except ValueError:
        return
    raise AssertionError(f"{label}: expected ValueError")


def main() -> None:
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = Path(tmpdir)
        build_extension(tmp)
        sys.path.insert(0, str(tmp))
        import fragmenta_py as fp

        print("module:", fp.__name__, "solvers:", fp.SOLVERS, "metrics:", fp.METRICS)

        img = ramp_image(64, 64)
        img_path = tmp / "ramp.png"
        img.save(img_path)

        # Slice from a path and from raw bytes.
        puzzle = fp.slice(str(img_path), 4, 4, piece_size=16)
        assert puzzle.rows == 4 and puzzle.cols == 4 and puzzle.piece_size == 16
        assert puzzle.source_id == "ramp"
        assert puzzle.piece_count() == 16
        assert puzzle.ground_truth()[5] == (1, 1)

        from_bytes = fp.slice(img_path.read_bytes(), 4, 4, piece_size=16)
        assert from_bytes.source_id == "memory"
        assert from_bytes.ground_truth() == puzzle.ground_truth()

        expect_value_error(lambda: fp.slice(b"not an image", 2, 2), "junk bytes")
        expect_value_error(lambda: fp.slice(str(img_path), 9, 9, piece_size=16), "too small")

        # Clean shuffled ramp reconstructs perfectly with every solver.
        shuffled = fp.shuffle_pieces(puzzle, seed=5)
        for solver in fp.SOLVERS:
            asm = fp.solve(shuffled, solver)
            assert len(asm) == 16
            assert fp.direct_comparison(asm, shuffled) == 100.0
            assert fp.perfect_reconstruction(asm, shuffled)
            print(f"solver {solver}: perfect on clean ramp")
        expect_value_error(lambda: fp.solve(shuffled, "nope"), "bad solver")

        asm = fp.solve(shuffled, "gallagher", metric="l1pred")
        assert asm.cell_of(0) == (0, 0)
        assert asm.piece_at(3, 3) == 15
        assert asm.placements()[0] == (0, (0, 0))

        # Corruption: 4 of 16 removed at rho 0.25, black substitution restores
        # solver visibility but not evaluation weight.
        missing = fp.apply_missing_pieces(puzzle, 0.25, seed=7)
        assert len(missing.counted_ids()) == 12
        assert len(missing.visible_ids()) == 12
        subbed = fp.substitute_black_patches(missing)
        assert len(subbed.visible_ids()) == 16
        assert len(subbed.counted_ids()) == 12

        eroded = fp.apply_eroded_edges(puzzle, 0.3, seed=11)
        contents = fp.apply_eroded_contents(puzzle, 40.0, seed=13)
        for corrupted in (missing, eroded, contents):
            result = fp.solve(corrupted, "paikin-tal")
            score = fp.direct_comparison(result, corrupted)
            assert 0.0 <= score <= 100.0
        expect_value_error(lambda: fp.apply_missing_pieces(puzzle, 0.9, seed=1), "rho range")

        # Ground-truth assembly is the identity and renders back to the frame.
        truth = missing.ground_truth_assembly()
        assert fp.direct_comparison(truth, missing) == 100.0
        png = fp.render(truth, missing, mark_errors=True)
        rendered = Image.open(io.BytesIO(png))
        assert rendered.size == (64, 64)

        # Bundle and assembly round trips.
        bundle = tmp / "bundle"
        missing.save(str(bundle))
        reloaded = fp.Puzzle.load(str(bundle))
        assert reloaded.source_id == "ramp"
        assert reloaded.counted_ids() == missing.counted_ids()
        assert reloaded.ground_truth() == missing.ground_truth()

        asm_path = tmp / "assembly.json"
        asm.save(str(asm_path))
        assert fp.Assembly.load(str(asm_path)).placements() == asm.placements()

        # Miniature benchmark: one image, one grid, level 0 of each corruption.
        images = tmp / "images"
        images.mkdir()
        ramp_image(48, 48).save(images / "mini.png")
        config = {
            "master_seed": 3,
            "images_dir": str(images),
            "piece_size": 16,
            "sizes": [[3, 3]],
            "levels": {
                "missing_pieces": [0.0],
                "eroded_edges": [0.0],
                "eroded_contents": [0.0],
            },
            "solvers": ["gallagher", "paikin-tal", "yu-lp"],
        }
        config_path = tmp / "bench.json"
        config_path.write_text(json.dumps(config))
        out_dir = tmp / "bench_out"
        outputs = fp.run_bench(str(config_path), str(out_dir), threads=2)
        assert "results.csv" in outputs and "summary.csv" in outputs
        assert sum(name.endswith(".svg") for name in outputs) == 6
        for name in outputs:
            assert (out_dir / name).is_file(), name
        assert (out_dir / "run_manifest.json").is_file()
        print("bench outputs:", ", ".join(sorted(outputs)))

    print("smoke test: OK")


if __name__ == "__main__":
    main()
