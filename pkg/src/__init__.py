# N-person envy-free chore division
