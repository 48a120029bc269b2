object_set = scene()
door = list(filter(object_set=object_set, category="door"))[0]
direction = query_relation_agent(object=door, candidate_relations=["o'clock"])
print(direction)
