import pytest

from pal.engine import available_kernels


@pytest.fixture(params=available_kernels())
def kernel(request):
    """Run the test once per available transition kernel."""
    return request.param
