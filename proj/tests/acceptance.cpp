#include <rsk/validation.hpp>

#include <cstdio>
#include <string>

int main(int argc, char **argv)
{
	rsk::ValidationOptions opts;
	for (int i = 1; i + 1 < argc; ++i)
	{
		if (std::string(argv[i]) == "--cli")
			opts.cli_path = argv[++i];
		else if (std::string(argv[i]) == "--scratch")
			opts.scratch_dir = argv[++i];
	}

	const rsk::ValidationSummary summary = rsk::run_validation(opts);

	for (int c = 1; c <= rsk::kCriteria; ++c)
	{
		int checks = 0, failed = 0;
		for (const rsk::CheckResult &r : summary.checks)
		{
			if (r.criterion != c || r.informational)
				continue;
			++checks;
			failed += r.pass ? 0 : 1;
		}
		std::printf("criterion %d: %s (%d/%d checks)\n", c, summary.criterion_pass(c) ? "PASS" : "FAIL",
					checks - failed, checks);
	}

	std::printf("\n");
	for (const rsk::CheckResult &r : summary.checks)
	{
		if (!r.pass || r.informational)
			std::printf("  [%d] %s: %s (tolerance %s)%s\n", r.criterion, r.claim.c_str(), r.computed.c_str(),
						r.tolerance.c_str(), r.informational ? " [info]" : " [FAIL]");
	}
	return summary.all_pass() ? 0 : 1;
}
