def _helper(value):
    return value + 1


def scale(value):
    return _helper(value) * 2


def log(total):
    return f"total={total}"


def boom():
    raise ValueError("kaput")
