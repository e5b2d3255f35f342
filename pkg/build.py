import hashlib
import os
import shutil
import subprocess
import sys
import zipfile
from datetime import datetime
from pathlib import Path

# each entry is a tuple that contains:
# (reproduce target, directory name to use inside of the results bundle)
REPRODUCE_TARGETS = [
    ("figures", "figures"),
    ("table1", "table1"),
]


def run_target(target: str, results_dir: Path, src_dir: Path) -> None:
    env = dict(os.environ, PYTHONPATH=str(src_dir))
    command = [sys.executable, "-m", "stsource", "-q", "reproduce", target]
    command += ["--out", str(results_dir)]
    code = subprocess.run(command, env=env, check=False).returncode
    if code != 0:
        raise SystemExit(f"reproduce {target} exited with {code}")


def write_digests(results_dir: Path) -> Path:
    digest_file = results_dir / "SHA256SUMS"
    lines = []
    for file_path in sorted(results_dir.rglob("*")):
        if file_path.is_file() and file_path != digest_file:
            digest = hashlib.sha256(file_path.read_bytes()).hexdigest()
            lines.append(f"{digest}  {file_path.relative_to(results_dir).as_posix()}")
            print(lines[-1])
    digest_file.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"Wrote {digest_file}")
    return digest_file


def create_results_zip(results_dir: Path, output_dir: Path) -> Path:
    output_zip = output_dir / "stsource_results.zip"
    modification_time = datetime(2000, 1, 1, 0, 0, 0)
    modification_timestamp = modification_time.timestamp()
    with zipfile.ZipFile(output_zip, "w", zipfile.ZIP_DEFLATED) as zf:
        for file_path in sorted(results_dir.rglob("*")):
            if file_path.is_file():
                # fixed timestamps keep the archive byte-identical between builds
                os.utime(file_path, (modification_timestamp, modification_timestamp))
                arcname = file_path.relative_to(results_dir)
                zf.write(file_path, arcname)

    print(f"Created {output_zip}")
    return output_zip


def main():
    # Get the project root directory
    root_dir = Path(__file__).parent

    # Set up paths
    output_dir = root_dir / "dist"
    results_dir = output_dir / "results"

    # delete output dir if it exists
    if output_dir.exists():
        shutil.rmtree(output_dir)

    # Create output directory
    results_dir.mkdir(parents=True, exist_ok=True)

    # Rerun each published experiment
    for target, dir_name in REPRODUCE_TARGETS:
        run_target(target, results_dir / dir_name, root_dir / "src")

    # copy the scenario files next to their results
    shutil.copytree(root_dir / "scenarios", results_dir / "scenarios", dirs_exist_ok=True)

    write_digests(results_dir)
    create_results_zip(results_dir, output_dir)


if __name__ == "__main__":
    main()
