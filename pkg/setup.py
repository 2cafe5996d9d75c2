from setuptools import setup, find_packages

with open("requirements.txt") as f:
	install_requires = f.read().strip().split("\n")

# get version from __version__ variable in wbasn_sim/__init__.py
from wbasn_sim import __version__ as version

setup(
	name="wbasn_sim",
	version=version,
	description="Round-based simulator of an event-driven body area sensor network measuring soldier fatigue",
	author="WBASN Sim contributors",
	packages=find_packages(),
	zip_safe=False,
	include_package_data=True,
	package_data={"wbasn_sim": ["defaults/*.conf", "wbasn_sim/doctype/*/*.json"]},
	install_requires=install_requires,
	entry_points={"console_scripts": ["wbasn-sim = wbasn_sim.wbasn_sim.cli:main"]},
)
