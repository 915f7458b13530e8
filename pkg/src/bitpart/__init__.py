import importlib.resources

DEFAULT_SCENARIO = "three_cell.yaml"


def default_scenario_text() -> str:
    """The packaged three-cell scenario."""
    return importlib.resources.files("bitpart").joinpath("config").joinpath(DEFAULT_SCENARIO).read_text()
